// experiment.hpp: run configured experiments and write CSV time series

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "loschmidt/dephasing.hpp"
#include "loschmidt/fock.hpp"
#include "loschmidt/harness/config.hpp"
#include "loschmidt/oscillator.hpp"
#include "loschmidt/random.hpp"
#include "loschmidt/shorttime.hpp"

namespace loschmidt::harness {

// All quantities are normalized by their t = 0 value. `coherence` is the
// direct route (partial trace, Gaussian branch overlap, exact joint
// dynamics), `fidelity` the echo route it is compared against.
struct TimeSeriesRecord {
    double t = 0.0;
    Complex coherence;
    Complex fidelity;
    double identity_residual = 0.0;
};

struct RunSummary {
    std::vector<TimeSeriesRecord> records;
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    double max_residual = 0.0;
};

// The residual column exceeded the configured tolerance.
struct ResidualError : NumericalError {
    using NumericalError::NumericalError;
};

inline std::vector<double> time_grid(const ExperimentConfig& cfg) {
    std::vector<double> t(static_cast<std::size_t>(cfg.n_points));
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = cfg.t_max * static_cast<double>(i) / static_cast<double>(cfg.n_points - 1);
    return t;
}

namespace detail {

inline HermitianOperator scaled_gue(Index dim, double scale, Rng& rng) { return scale * gue(dim, 1.0, rng); }

inline std::vector<TimeSeriesRecord> run_dephasing(const ExperimentConfig& cfg) {
    const auto& p = cfg.params<DephasingParams>();
    Rng rng(*cfg.seed);
    const HermitianOperator h_env = scaled_gue(p.dim_env, p.h_env_scale, rng);
    std::vector<HermitianOperator> couplings;
    if (!p.f)
        for (std::size_t j = 0; j < p.levels.size(); ++j) couplings.push_back(scaled_gue(p.dim_env, p.coupling_scale, rng));
    const DephasingModel model =
        p.f ? DephasingModel::proportional(p.levels, h_env, *p.f) : DephasingModel(p.levels, h_env, couplings);

    std::vector<Complex> a(p.levels.size(), Complex(1.0 / std::sqrt(static_cast<double>(p.levels.size()))));
    if (p.amplitudes) {
        double norm = 0.0;
        for (double x : *p.amplitudes) norm += x * x;
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = (*p.amplitudes)[j] / std::sqrt(norm);
    }

    const bool pipulse = cfg.kind == Kind::dephasing_pipulse;
    const JointDephasingEvolution joint(model);
    const std::vector<double> grid = time_grid(cfg);
    std::vector<TimeSeriesRecord> records(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) records[i].t = grid[i];
    const double samples = static_cast<double>(cfg.ensemble_samples);
    for (Index s = 0; s < cfg.ensemble_samples; ++s) {
        const InitialProduct init(a, random_state(p.dim_env, rng));
        const Complex rho0 = init.initial_coherence(p.j, p.k);
        if (std::abs(rho0) == 0.0)
            throw DomainError("the chosen pair has zero initial coherence; check 'amplitudes'");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid[i];
            Complex coherence;
            Complex fidelity;
            double residual;
            if (pipulse) {
                coherence = joint.pi_pulse_coherence(init, t) / rho0;
                fidelity = pi_pulse_echo_operator(model, t).expectation(init.chi0());
                residual = std::abs(coherence - fidelity);
            } else {
                coherence = joint.reduced_state(init, t)(p.j, p.k) / rho0;
                fidelity = echo_amplitude(model, init.chi0(), p.j, p.k, t);
                const Complex phase = std::exp(-kI * ((model.level(p.j) - model.level(p.k)) * t));
                residual = std::abs(coherence - phase * fidelity);
            }
            records[i].coherence += coherence / samples;
            records[i].fidelity += fidelity / samples;
            records[i].identity_residual = std::max(records[i].identity_residual, residual);
        }
    }
    return records;
}

// Gaussian branch overlaps on the grid from one trajectory per branch.
inline std::vector<Complex> gaussian_fidelities(const OscillatorBathModel& model, const CatStateSpec& spec,
                                                const ExperimentConfig& cfg) {
    const Index intervals = cfg.n_points - 1;
    const double interval = cfg.t_max / static_cast<double>(intervals);
    const auto substeps =
        std::max<Index>(1, static_cast<Index>(std::ceil(interval / default_time_step(model, cfg.t_max) - 1e-9)));
    const double dt = interval / static_cast<double>(substeps);
    const auto b1 = classical_trajectory(model, spec.z1, cfg.t_max, dt);
    const auto b2 = classical_trajectory(model, spec.z2, cfg.t_max, dt);
    std::vector<Complex> out(static_cast<std::size_t>(cfg.n_points));
    for (Index i = 0; i <= intervals; ++i) {
        const auto idx = static_cast<std::size_t>(i * substeps);
        out[static_cast<std::size_t>(i)] = branch_overlap(b1[idx], b2[idx]);
    }
    return out;
}

inline std::vector<TimeSeriesRecord> run_oscillator(const ExperimentConfig& cfg) {
    const auto& p = cfg.params<OscillatorParams>();
    const OscillatorBathModel model(p.omega_central, p.bath_frequencies, p.bath_couplings, p.fock_cutoff);
    const CatStateSpec spec{p.z1, p.z2};
    const std::vector<Complex> gaussian = gaussian_fidelities(model, spec, cfg);
    const DrivenEchoSeries echo = driven_echo_series(model, spec, cfg.t_max, cfg.n_points - 1, p.echo_step);
    const std::vector<double> grid = time_grid(cfg);
    std::vector<TimeSeriesRecord> records(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        records[i] = {grid[i], gaussian[i], echo.amplitudes[i], std::abs(gaussian[i] - echo.amplitudes[i])};
    return records;
}

inline std::vector<TimeSeriesRecord> run_markov(const ExperimentConfig& cfg) {
    const auto& p = cfg.params<MarkovParams>();
    const OscillatorBathModel model = ohmic_flat_bath(p.omega_central, p.modes, p.omega_min, p.omega_max, p.gamma);
    const CatStateSpec spec{p.z1, p.z2};
    const std::vector<Complex> gaussian = gaussian_fidelities(model, spec, cfg);
    const std::vector<double> grid = time_grid(cfg);
    std::vector<TimeSeriesRecord> records(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Complex reference = markov_exact(p.gamma, spec, grid[i]);
        records[i] = {grid[i], gaussian[i], reference, std::abs(gaussian[i] - reference)};
    }
    return records;
}

inline std::vector<TimeSeriesRecord> run_shorttime(const ExperimentConfig& cfg) {
    const auto& p = cfg.params<ShortTimeParams>();
    Rng rng(*cfg.seed);
    const auto nc = static_cast<Index>(p.s_spectrum.size());
    const HermitianOperator h_c = scaled_gue(nc, p.h_c_scale, rng);
    RealVector s(nc);
    for (Index i = 0; i < nc; ++i) s(i) = p.s_spectrum[static_cast<std::size_t>(i)];
    const HermitianOperator h_env = scaled_gue(p.dim_env, p.h_env_scale, rng);
    const HermitianOperator v_env = scaled_gue(p.dim_env, p.v_scale, rng);
    const StateVector b0 = random_state(p.dim_env, rng);
    const ShortTimeModel model(h_c, HermitianOperator::diagonal(s), h_env, v_env);
    const ShortTimeExact exact(model);
    const Branch bs = model.branch_of(p.s);
    const Branch bsp = model.branch_of(p.s_prime);
    if (bs.index == bsp.index)
        throw DomainError("'pair' must name two distinct eigenstates of S");
    const std::vector<double> grid = time_grid(cfg);
    std::vector<TimeSeriesRecord> records(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Complex full = 2.0 * exact.coherence(bs, bsp, b0, grid[i]);
        const Complex approx = 2.0 * shorttime_coherence(model, bs, bsp, b0, grid[i]);
        records[i] = {grid[i], full, approx, std::abs(full - approx)};
    }
    return records;
}

} // namespace detail

// Decay rate: minus the least-squares slope of ln|coherence|^2 over the fit
// window. NaN with fewer than two usable points.
inline double fitted_rate(const std::vector<TimeSeriesRecord>& records, double t_min, double t_max) {
    std::vector<double> x, y;
    for (const TimeSeriesRecord& r : records) {
        const double mag = std::abs(r.coherence);
        if (r.t >= t_min - 1e-12 && r.t <= t_max + 1e-12 && mag > 0.0) {
            x.push_back(r.t);
            y.push_back(std::log(mag * mag));
        }
    }
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return -sxy / sxx;
}

inline std::string format_csv(const std::vector<TimeSeriesRecord>& records) {
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out),
                   "t,coherence_re,coherence_im,coherence_abs,fidelity_re,fidelity_im,fidelity_abs,identity_residual\n");
    for (const TimeSeriesRecord& r : records)
        fmt::format_to(std::back_inserter(out), "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t,
                       r.coherence.real(), r.coherence.imag(), std::abs(r.coherence), r.fidelity.real(),
                       r.fidelity.imag(), std::abs(r.fidelity), r.identity_residual);
    return fmt::to_string(out);
}

inline void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path(), ec);
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out)
        throw IoError("failed writing " + path);
}

// Computes the series, writes it to cfg.output and then checks the column
// invariants and the residual tolerance.
inline RunSummary run(const ExperimentConfig& cfg) {
    RunSummary summary;
    switch (cfg.kind) {
    case Kind::dephasing:
    case Kind::dephasing_pipulse: summary.records = detail::run_dephasing(cfg); break;
    case Kind::oscillator: summary.records = detail::run_oscillator(cfg); break;
    case Kind::oscillator_markov: summary.records = detail::run_markov(cfg); break;
    case Kind::shorttime: summary.records = detail::run_shorttime(cfg); break;
    }
    write_text(cfg.output, format_csv(summary.records));
    for (const TimeSeriesRecord& r : summary.records) {
        summary.max_residual = std::max(summary.max_residual, r.identity_residual);
        if (!(std::abs(r.coherence) <= 1.0 + 1e-9) || !(std::abs(r.fidelity) <= 1.0 + 1e-9))
            throw NumericalError(fmt::format("|coherence| or |fidelity| exceeds 1 at t = {:.17g}", r.t));
    }
    summary.fitted_rate = fitted_rate(summary.records, cfg.fit_t_min, cfg.fit_t_max);
    if (summary.max_residual > cfg.residual_tolerance)
        throw ResidualError(fmt::format("identity residual {:.3e} exceeds tolerance {:.3e} (csv written to {})",
                                        summary.max_residual, cfg.residual_tolerance, cfg.output));
    return summary;
}

inline RawConfig with_seed(RawConfig raw, std::uint64_t seed) {
    auto& section = raw.sections["experiment"];
    auto& entry = section.entries["seed"];
    if (entry.line == 0) entry.line = section.line;
    entry.value = std::to_string(seed);
    return raw;
}

struct SweepPoint {
    double value;
    std::string csv;
    RunSummary summary;
};

// One run per value with `axis` overridden; point_NNN.csv per value and
// summary.csv (value, fitted_rate, max_residual) in out_dir.
inline std::vector<SweepPoint> sweep(const RawConfig& raw, const std::string& axis, const std::vector<double>& values,
                                     const std::string& out_dir) {
    const ExperimentConfig base = build_config(raw);
    if (values.empty())
        throw ConfigError(raw.source, 0, "sweep needs at least one value");
    std::vector<ExperimentConfig> configs;
    for (double v : values) configs.push_back(build_config(with_override(raw, base.kind, axis, v)));

    std::vector<SweepPoint> points;
    fmt::memory_buffer table;
    fmt::format_to(std::back_inserter(table), "value,fitted_rate,max_residual\n");
    for (std::size_t i = 0; i < configs.size(); ++i) {
        configs[i].output = (std::filesystem::path(out_dir) / fmt::format("point_{:03}.csv", i)).string();
        RunSummary s = run(configs[i]);
        fmt::format_to(std::back_inserter(table), "{:.17g},{:.17g},{:.17g}\n", values[i], s.fitted_rate, s.max_residual);
        points.push_back({values[i], configs[i].output, std::move(s)});
    }
    write_text((std::filesystem::path(out_dir) / "summary.csv").string(), fmt::to_string(table));
    return points;
}

} // namespace loschmidt::harness
