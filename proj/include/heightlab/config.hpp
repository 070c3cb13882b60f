#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "heightlab/interact.hpp"
#include "heightlab/mechanism.hpp"

namespace hl {

// Flat dotted key=value experiment configuration.  Reads are tracked so that
// validation can reject keys no pipeline ever consumed (typo protection).
class ExperimentConfig {
  public:
    static ExperimentConfig from_file(const std::string& path);

    // "key=value" override; last one wins
    void set_pair(const std::string& pair);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key,
                        const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::vector<double> get_list(const std::string& key,
                                 std::vector<double> fallback) const;

    // every stored key that no get_* call has touched
    std::vector<std::string> unconsumed() const;
    void require_all_consumed() const;  // throws listing unknown keys

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> consumed_;
};

// Builders for the config grammar.
//   mechanism.alpha, mechanism.beta
//   mechanism.pi.kind = zero | atoms | stable | expdensity
//   mechanism.pi.atoms = z:mass[,z:mass...]
//   mechanism.pi.index / .scale / .cutoff        (stable)
//   mechanism.pi.rate / .scale / .power          (expdensity)
Mechanism mechanism_from_config(const ExperimentConfig& cfg);
LevyMeasure levy_measure_from_config(const ExperimentConfig& cfg);

//   interaction.kind = linear | logistic | polynomial
//   interaction.alpha | interaction.c1,.c2 | interaction.coeffs = c1,c2,...
//   interaction.b = localization threshold (optional)
InteractionFn interaction_from_config(const ExperimentConfig& cfg);

}  // namespace hl
