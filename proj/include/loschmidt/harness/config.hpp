// config.hpp: experiment configuration files
//
// Flat key-value text, one key per line, '#' starts a comment:
//
//   [experiment]
//   kind = dephasing
//   seed = 7
//   t_max = 10
//   n_points = 51
//
//   [dephasing]
//   levels = 0, 1
//   dim_env = 64
//
// The model section is named after the kind. Lists are comma separated and a
// complex value is written as "re, im".

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loschmidt/errors.hpp"
#include "loschmidt/linalg.hpp"

namespace loschmidt::harness {

// Invalid configuration; `line` is 0 when the problem is not tied to a line.
struct ConfigError : Error {
    ConfigError(std::string source, int line, const std::string& message)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
          line(line) {}
    int line;
};

struct IoError : Error {
    using Error::Error;
};

struct RawEntry {
    std::string value;
    int line = 0;
};

struct RawSection {
    int line = 0;
    std::map<std::string, RawEntry> entries;
};

struct RawConfig {
    std::string source = "<config>";
    std::map<std::string, RawSection> sections;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Shortest text that parses back to the same double.
inline std::string format_value(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ec == std::errc() ? ptr : buffer);
}

} // namespace detail

inline RawConfig parse_config_text(std::string_view text, std::string source = "<config>") {
    RawConfig raw;
    raw.source = std::move(source);
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(raw.source, line_no, "malformed section header");
            current = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (current.empty())
                throw ConfigError(raw.source, line_no, "empty section name");
            if (raw.sections.count(current))
                throw ConfigError(raw.source, line_no, "section [" + current + "] appears twice");
            raw.sections[current].line = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(raw.source, line_no, "expected 'key = value'");
        if (current.empty())
            throw ConfigError(raw.source, line_no, "key outside of any section");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty())
            throw ConfigError(raw.source, line_no, "missing key before '='");
        auto& entries = raw.sections[current].entries;
        if (entries.count(key))
            throw ConfigError(raw.source, line_no, "duplicate key '" + key + "' in [" + current + "]");
        entries[key] = RawEntry{value, line_no};
    }
    return raw;
}

inline RawConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

enum class Kind { dephasing, dephasing_pipulse, oscillator, oscillator_markov, shorttime };

inline std::string kind_name(Kind kind) {
    switch (kind) {
    case Kind::dephasing: return "dephasing";
    case Kind::dephasing_pipulse: return "dephasing-pipulse";
    case Kind::oscillator: return "oscillator";
    case Kind::oscillator_markov: return "oscillator-markov";
    case Kind::shorttime: return "shorttime";
    }
    return "?";
}

struct DephasingParams {
    std::vector<double> levels;
    Index dim_env = 0;
    double h_env_scale = 1.0;
    double coupling_scale = 0.0;
    std::optional<std::vector<double>> f;  // V_j = f_j H_env when present
    std::optional<std::vector<double>> amplitudes;
    Index j = 0;
    Index k = 1;
};

struct OscillatorParams {
    double omega_central = 1.0;
    std::vector<double> bath_frequencies;
    std::vector<double> bath_couplings;
    Complex z1;
    Complex z2;
    int fock_cutoff = 20;
    double echo_step = 1e-3;
};

struct MarkovParams {
    double omega_central = 0.0;
    Index modes = 0;
    double omega_min = 0.0;
    double omega_max = 0.0;
    double gamma = 0.0;
    Complex z1;
    Complex z2;
};

struct ShortTimeParams {
    std::vector<double> s_spectrum;
    double h_c_scale = 0.0;
    Index dim_env = 0;
    double h_env_scale = 1.0;
    double v_scale = 1.0;
    double s = 0.0;
    double s_prime = 0.0;
};

struct ExperimentConfig {
    Kind kind = Kind::dephasing;
    std::optional<std::uint64_t> seed;
    double t_max = 0.0;
    Index n_points = 0;
    std::string output = "out.csv";
    Index ensemble_samples = 1;
    double residual_tolerance = tolerance::dynamical;  // +inf disables the check
    double fit_t_min = 0.0;
    double fit_t_max = 0.0;
    std::variant<DephasingParams, OscillatorParams, MarkovParams, ShortTimeParams> model;

    template <class P> const P& params() const { return std::get<P>(model); }
};

namespace detail {

// Reads typed values out of one section.
class SectionReader {
public:
    SectionReader(const RawConfig& raw, const std::string& name) : raw_(raw), name_(name) {
        const auto it = raw.sections.find(name);
        if (it == raw.sections.end())
            throw ConfigError(raw.source, 0, "missing section [" + name + "]");
        section_ = &it->second;
    }

    bool has(const std::string& key) const { return section_->entries.count(key) > 0; }

    const RawEntry& entry(const std::string& key) {
        const auto it = section_->entries.find(key);
        if (it == section_->entries.end())
            throw ConfigError(raw_.source, section_->line, "[" + name_ + "] is missing required key '" + key + "'");
        return it->second;
    }

    std::string text(const std::string& key) { return entry(key).value; }

    double number(const std::string& key) {
        const RawEntry& e = entry(key);
        return parse_number(e.value, e.line, key);
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key) {
        const RawEntry& e = entry(key);
        std::int64_t out = 0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last)
            throw error(e.line, "'" + key + "' must be an integer, got '" + e.value + "'");
        return out;
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key) {
        const RawEntry& e = entry(key);
        std::uint64_t out = 0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last)
            throw error(e.line, "'" + key + "' must be a non-negative integer, got '" + e.value + "'");
        return out;
    }

    std::vector<double> list(const std::string& key) {
        const RawEntry& e = entry(key);
        std::vector<double> out;
        std::string_view rest = e.value;
        while (true) {
            const auto comma = rest.find(',');
            const std::string_view item = trim(rest.substr(0, comma));
            out.push_back(parse_number(std::string(item), e.line, key));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return out;
    }

    Complex complex(const std::string& key) {
        const std::vector<double> parts = list(key);
        if (parts.size() != 2)
            throw error(entry(key).line, "'" + key + "' must be a complex number written as 're, im'");
        return {parts[0], parts[1]};
    }

    ConfigError error(int line, const std::string& message) const { return ConfigError(raw_.source, line, message); }
    int line_of(const std::string& key) const {
        const auto it = section_->entries.find(key);
        return it == section_->entries.end() ? section_->line : it->second.line;
    }

    // Rejects keys outside `allowed`, reporting the first offending line.
    void allow(std::initializer_list<const char*> allowed) const {
        for (const auto& [key, e] : section_->entries) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok)
                throw error(e.line, "unknown key '" + key + "' in [" + name_ + "]");
        }
    }

private:
    double parse_number(const std::string& text, int line, const std::string& key) const {
        if (text == "inf" || text == "none") return std::numeric_limits<double>::infinity();
        double out = 0.0;
        const char* first = text.data();
        const char* last = first + text.size();
        const auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last || text.empty())
            throw error(line, "'" + key + "' must be a number, got '" + text + "'");
        return out;
    }

    const RawConfig& raw_;
    std::string name_;
    const RawSection* section_ = nullptr;
};

inline Kind parse_kind(const std::string& text, const SectionReader& reader, int line) {
    for (Kind k : {Kind::dephasing, Kind::dephasing_pipulse, Kind::oscillator, Kind::oscillator_markov,
                   Kind::shorttime})
        if (kind_name(k) == text) return k;
    throw reader.error(line, "unknown kind '" + text +
                                 "' (expected dephasing, dephasing-pipulse, oscillator, oscillator-markov or shorttime)");
}

inline void require(bool ok, const SectionReader& reader, int line, const std::string& message) {
    if (!ok) throw reader.error(line, message);
}

inline Index positive_index(SectionReader& r, const std::string& key) {
    const std::int64_t v = r.integer(key);
    require(v >= 1, r, r.line_of(key), "'" + key + "' must be at least 1");
    return static_cast<Index>(v);
}

// z1 and z2, or a real separation d placing them at +d/2 and -d/2.
inline std::pair<Complex, Complex> cat_labels(SectionReader& r) {
    if (r.has("separation")) {
        require(!r.has("z1") && !r.has("z2"), r, r.line_of("separation"),
                "give either 'separation' or 'z1' and 'z2', not both");
        const double d = r.number("separation");
        return {Complex(0.5 * d, 0.0), Complex(-0.5 * d, 0.0)};
    }
    return {r.complex("z1"), r.complex("z2")};
}

inline void check_pair(Index j, Index k, Index n, SectionReader& r) {
    require(j >= 0 && k >= 0 && j < n && k < n, r, r.line_of("pair"), "'pair' indices must lie in [0, levels)");
    require(j != k, r, r.line_of("pair"), "'pair' needs two distinct levels");
}

inline DephasingParams read_dephasing(SectionReader& r, bool pipulse) {
    DephasingParams p;
    p.levels = r.list("levels");
    require(p.levels.size() >= 2, r, r.line_of("levels"), "'levels' needs at least two central levels");
    if (pipulse) require(p.levels.size() == 2, r, r.line_of("levels"), "the pi-pulse protocol needs exactly two levels");
    p.dim_env = positive_index(r, "dim_env");
    const auto n = static_cast<Index>(p.levels.size());
    require(n * p.dim_env <= kMaxJointDim, r, r.line_of("dim_env"),
            "joint dimension " + std::to_string(n * p.dim_env) + " exceeds the cap " + std::to_string(kMaxJointDim));
    p.h_env_scale = r.number("h_env_scale", 1.0);
    if (r.has("f")) {
        require(!r.has("coupling_scale"), r, r.line_of("f"), "give either 'f' or 'coupling_scale', not both");
        p.f = r.list("f");
        require(p.f->size() == p.levels.size(), r, r.line_of("f"), "'f' needs one factor per level");
    } else {
        p.coupling_scale = r.number("coupling_scale");
        require(p.coupling_scale >= 0.0 && std::isfinite(p.coupling_scale), r, r.line_of("coupling_scale"),
                "'coupling_scale' must be finite and non-negative");
    }
    require(p.h_env_scale >= 0.0 && std::isfinite(p.h_env_scale), r, r.line_of("h_env_scale"),
            "'h_env_scale' must be finite and non-negative");
    if (r.has("amplitudes")) {
        p.amplitudes = r.list("amplitudes");
        require(p.amplitudes->size() == p.levels.size(), r, r.line_of("amplitudes"),
                "'amplitudes' needs one entry per level");
        double norm = 0.0;
        for (double a : *p.amplitudes) norm += a * a;
        require(norm > 0.0, r, r.line_of("amplitudes"), "'amplitudes' must not all vanish");
    }
    if (r.has("pair")) {
        const std::vector<double> pair = r.list("pair");
        require(pair.size() == 2, r, r.line_of("pair"), "'pair' takes two level indices");
        p.j = static_cast<Index>(pair[0]);
        p.k = static_cast<Index>(pair[1]);
        require(static_cast<double>(p.j) == pair[0] && static_cast<double>(p.k) == pair[1], r, r.line_of("pair"),
                "'pair' indices must be integers");
    }
    if (pipulse) {
        p.j = 0;
        p.k = 1;
    }
    check_pair(p.j, p.k, n, r);
    return p;
}

inline OscillatorParams read_oscillator(SectionReader& r) {
    OscillatorParams p;
    p.omega_central = r.number("omega_central");
    p.bath_frequencies = r.list("bath_frequencies");
    p.bath_couplings = r.list("bath_couplings");
    require(p.bath_frequencies.size() == p.bath_couplings.size(), r, r.line_of("bath_couplings"),
            "'bath_couplings' needs one entry per bath frequency");
    std::tie(p.z1, p.z2) = cat_labels(r);
    p.fock_cutoff = static_cast<int>(r.integer("fock_cutoff", 20));
    require(p.fock_cutoff >= 1, r, r.line_of("fock_cutoff"), "'fock_cutoff' must be at least 1");
    p.echo_step = r.number("echo_step", 1e-3);
    require(p.echo_step > 0.0, r, r.line_of("echo_step"), "'echo_step' must be positive");
    return p;
}

inline MarkovParams read_markov(SectionReader& r) {
    MarkovParams p;
    p.omega_central = r.number("omega_central");
    p.modes = positive_index(r, "modes");
    p.omega_min = r.number("omega_min");
    p.omega_max = r.number("omega_max");
    require(p.omega_max > p.omega_min, r, r.line_of("omega_max"), "'omega_max' must exceed 'omega_min'");
    require(p.omega_central >= p.omega_min && p.omega_central <= p.omega_max, r, r.line_of("omega_central"),
            "'omega_central' must lie inside the bath band");
    p.gamma = r.number("gamma");
    require(p.gamma > 0.0, r, r.line_of("gamma"), "'gamma' must be positive");
    std::tie(p.z1, p.z2) = cat_labels(r);
    return p;
}

inline ShortTimeParams read_shorttime(SectionReader& r) {
    ShortTimeParams p;
    p.s_spectrum = r.list("s_spectrum");
    require(p.s_spectrum.size() >= 2, r, r.line_of("s_spectrum"), "'s_spectrum' needs at least two eigenvalues");
    p.dim_env = positive_index(r, "dim_env");
    const auto n = static_cast<Index>(p.s_spectrum.size());
    require(n * p.dim_env <= kMaxJointDim, r, r.line_of("dim_env"),
            "joint dimension " + std::to_string(n * p.dim_env) + " exceeds the cap " + std::to_string(kMaxJointDim));
    p.h_c_scale = r.number("h_c_scale", 0.0);
    p.h_env_scale = r.number("h_env_scale", 1.0);
    p.v_scale = r.number("v_scale");
    for (const char* key : {"h_c_scale", "h_env_scale", "v_scale"})
        if (r.has(key))
            require(r.number(key) >= 0.0 && std::isfinite(r.number(key)), r, r.line_of(key),
                    std::string("'") + key + "' must be finite and non-negative");
    const std::vector<double> pair = r.list("pair");
    require(pair.size() == 2, r, r.line_of("pair"), "'pair' takes two eigenvalues s, s' of S");
    for (double s : pair) {
        bool found = false;
        for (double e : p.s_spectrum) found = found || std::abs(e - s) <= tolerance::dynamical;
        require(found, r, r.line_of("pair"), "'pair' value " + std::to_string(s) + " is not in 's_spectrum'");
    }
    require(pair[0] != pair[1], r, r.line_of("pair"), "'pair' needs two distinct eigenvalues");
    p.s = pair[0];
    p.s_prime = pair[1];
    return p;
}

} // namespace detail

// Scalar keys a sweep may override, per kind. List entries are addressed as
// key[i].
inline std::vector<std::string> sweep_axes(Kind kind) {
    switch (kind) {
    case Kind::dephasing:
    case Kind::dephasing_pipulse:
        return {"h_env_scale", "coupling_scale", "dim_env", "f[i]", "levels[i]"};
    case Kind::oscillator:
        return {"omega_central", "separation", "fock_cutoff", "echo_step", "bath_couplings[i]", "bath_frequencies[i]"};
    case Kind::oscillator_markov:
        return {"omega_central", "gamma", "separation", "modes", "omega_min", "omega_max"};
    case Kind::shorttime:
        return {"h_c_scale", "h_env_scale", "v_scale", "dim_env", "s_spectrum[i]"};
    }
    return {};
}

inline ExperimentConfig build_config(const RawConfig& raw) {
    detail::SectionReader exp(raw, "experiment");
    exp.allow({"kind", "seed", "t_max", "n_points", "output", "ensemble_samples", "residual_tolerance", "fit_t_min",
               "fit_t_max"});
    ExperimentConfig cfg;
    cfg.kind = detail::parse_kind(exp.text("kind"), exp, exp.line_of("kind"));
    if (exp.has("seed")) cfg.seed = exp.unsigned_integer("seed");
    cfg.t_max = exp.number("t_max");
    detail::require(cfg.t_max > 0.0 && std::isfinite(cfg.t_max), exp, exp.line_of("t_max"), "'t_max' must be positive");
    const std::int64_t n_points = exp.integer("n_points");
    detail::require(n_points >= 2, exp, exp.line_of("n_points"), "'n_points' must be at least 2");
    cfg.n_points = static_cast<Index>(n_points);
    if (exp.has("output")) cfg.output = exp.text("output");
    const std::int64_t samples = exp.integer("ensemble_samples", 1);
    detail::require(samples >= 1, exp, exp.line_of("ensemble_samples"), "'ensemble_samples' must be at least 1");
    cfg.ensemble_samples = static_cast<Index>(samples);

    const std::string model_section = kind_name(cfg.kind);
    for (const auto& [name, section] : raw.sections)
        if (name != "experiment" && name != model_section)
            throw ConfigError(raw.source, section.line,
                              "unexpected section [" + name + "] for kind " + model_section);
    detail::SectionReader model(raw, model_section);

    double default_tolerance = tolerance::dynamical;
    double fit_min = 0.0;
    double fit_max = cfg.t_max;
    switch (cfg.kind) {
    case Kind::dephasing:
    case Kind::dephasing_pipulse:
        model.allow({"levels", "dim_env", "h_env_scale", "coupling_scale", "f", "amplitudes", "pair"});
        cfg.model = detail::read_dephasing(model, cfg.kind == Kind::dephasing_pipulse);
        break;
    case Kind::oscillator:
        model.allow({"omega_central", "bath_frequencies", "bath_couplings", "z1", "z2", "separation", "fock_cutoff",
                     "echo_step"});
        cfg.model = detail::read_oscillator(model);
        default_tolerance = tolerance::truncation;
        break;
    case Kind::oscillator_markov: {
        model.allow({"omega_central", "modes", "omega_min", "omega_max", "gamma", "z1", "z2", "separation"});
        const MarkovParams p = detail::read_markov(model);
        cfg.model = p;
        // Comparison against the Markov limit is not an identity.
        default_tolerance = std::numeric_limits<double>::infinity();
        fit_min = 0.05 / p.gamma;
        fit_max = 0.3 / p.gamma;
        break;
    }
    case Kind::shorttime: {
        model.allow({"s_spectrum", "h_c_scale", "dim_env", "h_env_scale", "v_scale", "pair"});
        const ShortTimeParams p = detail::read_shorttime(model);
        cfg.model = p;
        if (p.h_c_scale > 0.0) default_tolerance = std::numeric_limits<double>::infinity();
        break;
    }
    }

    const bool random = cfg.kind == Kind::dephasing || cfg.kind == Kind::dephasing_pipulse || cfg.kind == Kind::shorttime;
    if (random && !cfg.seed)
        throw ConfigError(raw.source, raw.sections.at("experiment").line,
                          "[experiment] needs 'seed' for kind " + model_section);
    if (cfg.ensemble_samples > 1 && cfg.kind != Kind::dephasing)
        throw ConfigError(raw.source, exp.line_of("ensemble_samples"),
                          "'ensemble_samples' > 1 is only supported for kind dephasing");

    cfg.residual_tolerance = exp.number("residual_tolerance", default_tolerance);
    detail::require(cfg.residual_tolerance >= 0.0, exp, exp.line_of("residual_tolerance"),
                    "'residual_tolerance' must be non-negative");
    cfg.fit_t_min = exp.number("fit_t_min", fit_min);
    cfg.fit_t_max = exp.number("fit_t_max", fit_max);
    detail::require(cfg.fit_t_max > cfg.fit_t_min, exp, exp.line_of("fit_t_max"), "'fit_t_max' must exceed 'fit_t_min'");
    return cfg;
}

// Replaces (or adds) one model-section value; "key[i]" edits one list entry.
inline RawConfig with_override(RawConfig raw, Kind kind, const std::string& axis, double value) {
    const std::vector<std::string> axes = sweep_axes(kind);
    std::string key = axis;
    std::optional<std::size_t> element;
    if (const auto open = axis.find('['); open != std::string::npos && axis.back() == ']') {
        key = axis.substr(0, open);
        std::size_t idx = 0;
        const std::string digits = axis.substr(open + 1, axis.size() - open - 2);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
            throw ConfigError(raw.source, 0, "malformed sweep axis '" + axis + "'");
        element = idx;
    }
    bool known = false;
    for (const std::string& a : axes) known = known || a == (element ? key + "[i]" : key);
    if (!known) {
        std::string list;
        for (const std::string& a : axes) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(raw.source, 0, "unknown sweep axis '" + axis + "'; valid axes: " + list);
    }
    auto section_it = raw.sections.find(kind_name(kind));
    if (section_it == raw.sections.end())
        throw ConfigError(raw.source, 0, "missing section [" + kind_name(kind) + "]");
    auto& entries = section_it->second.entries;
    const std::string text = detail::format_value(value);
    if (element) {
        const auto it = entries.find(key);
        if (it == entries.end())
            throw ConfigError(raw.source, 0, "sweep axis '" + axis + "' needs '" + key + "' in the config");
        std::vector<std::string> items;
        std::string_view rest = it->second.value;
        while (true) {
            const auto comma = rest.find(',');
            items.emplace_back(detail::trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (*element >= items.size())
            throw ConfigError(raw.source, it->second.line, "sweep axis '" + axis + "' is past the end of '" + key + "'");
        items[*element] = text;
        std::string joined;
        for (const std::string& item : items) joined += (joined.empty() ? "" : ", ") + item;
        it->second.value = joined;
    } else if (key == "separation") {
        entries.erase("z1");
        entries.erase("z2");
        entries["separation"] = RawEntry{text, section_it->second.line};
    } else {
        auto& entry = entries[key];
        if (entry.line == 0) entry.line = section_it->second.line;
        entry.value = text;
    }
    return raw;
}

} // namespace loschmidt::harness
