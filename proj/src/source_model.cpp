#include "qprad/source_model.hpp"

#include <set>

#include "qprad/errors.hpp"

namespace qprad {

std::string_view to_string(ShieldState state) {
  switch (state) {
    case ShieldState::none: return "none";
    case ShieldState::up: return "up";
    case ShieldState::down: return "down";
  }
  return "none";
}

ShieldState shield_state_from_string(std::string_view text) {
  if (text == "none") return ShieldState::none;
  if (text == "up") return ShieldState::up;
  if (text == "down") return ShieldState::down;
  throw DataError("unknown shield position '" + std::string(text) + "'");
}

Isotope::Isotope(std::string name, double half_life_s, MaterialCoefficients power_coeff)
    : name_(std::move(name)), half_life_s_(half_life_s), power_coeff_(std::move(power_coeff)) {
  if (!(half_life_s_ > 0.0)) {
    throw ConfigError("isotope '" + name_ + "': half-life must be positive");
  }
  for (const auto& [material, coeff] : power_coeff_) {
    if (!(coeff >= 0.0)) {
      throw ConfigError("isotope '" + name_ + "': negative power coefficient for " + material);
    }
  }
}

double Isotope::coefficient(const std::string& material) const {
  auto it = power_coeff_.find(material);
  if (it == power_coeff_.end()) {
    throw ConfigError("isotope '" + name_ + "' has no power coefficient for material '" +
                      material + "'");
  }
  return it->second;
}

SourceInventory::SourceInventory(std::string reference_time_utc,
                                 std::vector<InventoryEntry> entries)
    : reference_time_utc_(std::move(reference_time_utc)), entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& entry : entries_) {
    if (!(entry.activity_bq >= 0.0)) {
      throw ConfigError("isotope '" + entry.isotope.name() + "': negative activity");
    }
    if (!seen.insert(entry.isotope.name()).second) {
      throw ConfigError("duplicate isotope '" + entry.isotope.name() + "' in inventory");
    }
  }
}

EnvironmentModel::EnvironmentModel(std::vector<EnvironmentComponent> components,
                                   double internal_power)
    : components_(std::move(components)), internal_power_(internal_power) {
  if (!(internal_power_ >= 0.0)) throw ConfigError("internal power density must be >= 0");
  for (auto& c : components_) {
    for (const auto& [material, p] : c.power_density) {
      if (!(p >= 0.0)) {
        throw ConfigError("environment component '" + c.name + "': negative power for " +
                          material);
      }
    }
    for (const auto& [state, eta] : c.efficiency) {
      if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ConfigError("environment component '" + c.name +
                          "': shield efficiency outside [0,1]");
      }
    }
    c.efficiency[ShieldState::none] = 0.0;
  }
}

std::map<std::string, double> activity_at(const SourceInventory& inventory, double t_s) {
  std::map<std::string, double> out;
  for (const auto& e : inventory.entries()) {
    out[e.isotope.name()] = decayed_activity(e.activity_bq, e.isotope.half_life_s(), t_s);
  }
  return out;
}

double source_power_density(const SourceInventory& inventory, double t_s,
                            const std::string& material) {
  double total = 0.0;
  for (const auto& e : inventory.entries()) {
    total += decayed_activity(e.activity_bq, e.isotope.half_life_s(), t_s) *
             e.isotope.coefficient(material);
  }
  return total;
}

Eigen::ArrayXd source_power_density(const SourceInventory& inventory, const Eigen::ArrayXd& t_s,
                                    const std::string& material) {
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(t_s.size());
  for (const auto& e : inventory.entries()) {
    const double coeff = e.isotope.coefficient(material);
    total += e.activity_bq * coeff * (-std::log(2.0) / e.isotope.half_life_s() * t_s).exp();
  }
  return total;
}

std::map<std::string, double> source_power_breakdown(const SourceInventory& inventory, double t_s,
                                                     const std::string& material) {
  std::map<std::string, double> out;
  for (const auto& e : inventory.entries()) {
    out[e.isotope.name()] = decayed_activity(e.activity_bq, e.isotope.half_life_s(), t_s) *
                            e.isotope.coefficient(material);
  }
  return out;
}

namespace {

double component_power(const EnvironmentComponent& c, const std::string& material) {
  auto it = c.power_density.find(material);
  return it == c.power_density.end() ? 0.0 : it->second;
}

double component_efficiency(const EnvironmentComponent& c, ShieldState shield) {
  auto it = c.efficiency.find(shield);
  return it == c.efficiency.end() ? 0.0 : it->second;
}

}  // namespace

double external_power_density(const EnvironmentModel& env, ShieldState shield,
                              const std::string& material) {
  double total = 0.0;
  for (const auto& c : env.components()) {
    total += (1.0 - component_efficiency(c, shield)) * component_power(c, material);
  }
  return total;
}

double environment_power_density(const EnvironmentModel& env, ShieldState shield,
                                 const std::string& material) {
  return env.internal_power() + external_power_density(env, shield, material);
}

double effective_shield_efficiency(const EnvironmentModel& env, ShieldState shield,
                                   const std::string& material) {
  const double open = external_power_density(env, ShieldState::none, material);
  if (open <= 0.0) return 0.0;
  return 1.0 - external_power_density(env, shield, material) / open;
}

double total_power_density(const SourceInventory& inventory, const EnvironmentModel& env,
                           ShieldState shield, double t_s, const std::string& material) {
  return source_power_density(inventory, t_s, material) +
         environment_power_density(env, shield, material);
}

Eigen::ArrayXd total_power_density(const SourceInventory& inventory, const EnvironmentModel& env,
                                   ShieldState shield, const Eigen::ArrayXd& t_s,
                                   const std::string& material) {
  return source_power_density(inventory, t_s, material) +
         environment_power_density(env, shield, material);
}

}  // namespace qprad
