#include "heightlab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_num(const std::string& key, const std::string& v) {
    if (v == "inf") return kInf;
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config key '" + key +
                                    "': not a number: " + v);
    return x;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(ln) +
                                        ": expected key=value");
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

void ExperimentConfig::set_pair(const std::string& pair) {
    auto eq = pair.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--set expects KEY=VALUE, got: " + pair);
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key.empty()) throw std::invalid_argument("empty config key");
    kv_[key] = value;
}

bool ExperimentConfig::has(const std::string& key) const {
    auto it = kv_.find(key);
    if (it != kv_.end()) consumed_.insert(key);
    return it != kv_.end();
}

std::string ExperimentConfig::get_str(const std::string& key,
                                      const std::string& fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::get_num(const std::string& key,
                                 double fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_num(key, it->second);
}

std::int64_t ExperimentConfig::get_int(const std::string& key,
                                       std::int64_t fallback) const {
    double v = get_num(key, static_cast<double>(fallback));
    return static_cast<std::int64_t>(v);
}

std::vector<double> ExperimentConfig::get_list(
    const std::string& key, std::vector<double> fallback) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_num(key, item));
    }
    return out;
}

std::vector<std::string> ExperimentConfig::unconsumed() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_)
        if (!consumed_.count(k)) out.push_back(k);
    return out;
}

void ExperimentConfig::require_all_consumed() const {
    auto bad = unconsumed();
    if (bad.empty()) return;
    std::string msg = "unknown config key(s):";
    for (const auto& k : bad) msg += " " + k;
    throw std::invalid_argument(msg);
}

LevyMeasure levy_measure_from_config(const ExperimentConfig& cfg) {
    std::string kind = cfg.get_str("mechanism.pi.kind", "zero");
    if (kind == "zero") return LevyMeasure::zero();
    if (kind == "atoms") {
        std::string spec = cfg.get_str("mechanism.pi.atoms", "");
        if (spec.empty())
            throw std::invalid_argument(
                "mechanism.pi.atoms required for kind=atoms");
        std::vector<Atom> atoms;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument(
                    "mechanism.pi.atoms: expected z:mass, got " + item);
            atoms.push_back({parse_num("mechanism.pi.atoms",
                                       trim(item.substr(0, colon))),
                             parse_num("mechanism.pi.atoms",
                                       trim(item.substr(colon + 1)))});
        }
        return LevyMeasure::atoms(std::move(atoms));
    }
    if (kind == "stable")
        return LevyMeasure::truncated_stable(
            cfg.get_num("mechanism.pi.index", 1.5),
            cfg.get_num("mechanism.pi.scale", 1.0),
            cfg.get_num("mechanism.pi.cutoff", kInf));
    if (kind == "expdensity")
        return LevyMeasure::exponential_density(
            cfg.get_num("mechanism.pi.rate", 1.0),
            cfg.get_num("mechanism.pi.scale", 1.0),
            cfg.get_num("mechanism.pi.power", 0.0));
    throw std::invalid_argument("mechanism.pi.kind: unknown kind " + kind);
}

Mechanism mechanism_from_config(const ExperimentConfig& cfg) {
    return Mechanism(cfg.get_num("mechanism.alpha", 0.0),
                     cfg.get_num("mechanism.beta", 1.0),
                     levy_measure_from_config(cfg));
}

InteractionFn interaction_from_config(const ExperimentConfig& cfg) {
    std::string kind = cfg.get_str("interaction.kind", "linear");
    InteractionFn f;
    if (kind == "linear") {
        f = linear_interaction(cfg.get_num("interaction.alpha", 0.0));
    } else if (kind == "logistic") {
        f = logistic_interaction(cfg.get_num("interaction.c1", 1.0),
                                 cfg.get_num("interaction.c2", 1.0));
    } else if (kind == "polynomial") {
        auto coeffs = cfg.get_list("interaction.coeffs", {});
        if (coeffs.empty())
            throw std::invalid_argument(
                "interaction.coeffs required for kind=polynomial");
        f = polynomial_interaction(std::move(coeffs));
    } else {
        throw std::invalid_argument("interaction.kind: unknown kind " + kind);
    }
    double b = cfg.get_num("interaction.b", kInf);
    if (b != kInf) f = localize(f, b);
    return f;
}

}  // namespace hl
