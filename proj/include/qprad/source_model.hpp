#pragma once

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qprad {

enum class ShieldState { none, up, down };

std::string_view to_string(ShieldState state);
ShieldState shield_state_from_string(std::string_view text);

// Absorbed power density per unit activity, keyed by material name
// (keV s^-1 mm^-3 per Bq).
using MaterialCoefficients = std::map<std::string, double>;

class Isotope {
 public:
  Isotope(std::string name, double half_life_s, MaterialCoefficients power_coeff);

  const std::string& name() const { return name_; }
  double half_life_s() const { return half_life_s_; }
  const MaterialCoefficients& power_coeff() const { return power_coeff_; }
  // Throws ConfigError naming this isotope when the material is missing.
  double coefficient(const std::string& material) const;

 private:
  std::string name_;
  double half_life_s_;
  MaterialCoefficients power_coeff_;
};

struct InventoryEntry {
  Isotope isotope;
  double activity_bq;  // at the inventory reference time
};

// Radioisotopes with activities pinned at a reference time. Time arguments
// everywhere are seconds elapsed since that reference.
class SourceInventory {
 public:
  SourceInventory() = default;
  SourceInventory(std::string reference_time_utc, std::vector<InventoryEntry> entries);

  const std::string& reference_time_utc() const { return reference_time_utc_; }
  const std::vector<InventoryEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::string reference_time_utc_;
  std::vector<InventoryEntry> entries_;
};

struct EnvironmentComponent {
  std::string name;
  std::map<std::string, double> power_density;   // keV s^-1 mm^-3 per material
  std::map<ShieldState, double> efficiency;      // blocked fraction; `none` is always 0
};

class EnvironmentModel {
 public:
  EnvironmentModel() = default;
  EnvironmentModel(std::vector<EnvironmentComponent> components, double internal_power);

  const std::vector<EnvironmentComponent>& components() const { return components_; }
  double internal_power() const { return internal_power_; }

 private:
  std::vector<EnvironmentComponent> components_;
  double internal_power_ = 0.0;
};

/// Activity of every isotope at `t_s` seconds after the reference time.
/// Negative times back-extrapolate.
std::map<std::string, double> activity_at(const SourceInventory& inventory, double t_s);

/// Decay law for a single activity.
inline double decayed_activity(double activity_bq, double half_life_s, double t_s) {
  return activity_bq * std::exp2(-t_s / half_life_s);
}

double source_power_density(const SourceInventory& inventory, double t_s,
                            const std::string& material);
Eigen::ArrayXd source_power_density(const SourceInventory& inventory,
                                    const Eigen::ArrayXd& t_s, const std::string& material);

/// Per-isotope contribution to the source power density.
std::map<std::string, double> source_power_breakdown(const SourceInventory& inventory,
                                                     double t_s, const std::string& material);

/// External (shield-attenuated) part only.
double external_power_density(const EnvironmentModel& env, ShieldState shield,
                              const std::string& material);

/// P_int + sum_c (1 - eta_c(shield)) P_c(material).
double environment_power_density(const EnvironmentModel& env, ShieldState shield,
                                 const std::string& material);

/// Power-weighted shield efficiency: 1 - P_ext(shield) / P_ext(none).
double effective_shield_efficiency(const EnvironmentModel& env, ShieldState shield,
                                   const std::string& material);

double total_power_density(const SourceInventory& inventory, const EnvironmentModel& env,
                           ShieldState shield, double t_s, const std::string& material);
Eigen::ArrayXd total_power_density(const SourceInventory& inventory,
                                   const EnvironmentModel& env, ShieldState shield,
                                   const Eigen::ArrayXd& t_s, const std::string& material);

}  // namespace qprad
