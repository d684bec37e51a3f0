#ifndef TWINCORR_OPTIMIZER_HPP
#define TWINCORR_OPTIMIZER_HPP

// Genetic optimization over super-pixel genomes with noisy coincidence
// counts as fitness. In sGA mode the genes are orbit representatives under
// inversion about the symmetry center and every phenotype is symmetrized
// before evaluation; GA mode is the same machinery with identity orbits.
//
// Selection is linear-rank weighted, crossover is uniform per gene,
// mutation replaces a gene by a fresh uniform level. Elites carry their
// recorded counts; they are not re-measured.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "twincorr/genome.hpp"
#include "twincorr/rates.hpp"
#include "twincorr/rates_full.hpp"
#include "twincorr/rng.hpp"

namespace twincorr {

struct GaConfig {
    int population = 15;
    double mutation_rate = 0.1;
    int elites = 3;
    int generations = 100;
    int runs = 5;
    int superpixel = 8;

    void validate() const {
        if (population < 2) throw ConfigError("GaConfig: population must be >= 2");
        if (elites < 0 || elites >= population)
            throw ConfigError("GaConfig: need 0 <= elites < population");
        if (mutation_rate < 0.0 || mutation_rate > 1.0)
            throw ConfigError("GaConfig: mutation_rate must be in [0,1]");
        if (generations < 1) throw ConfigError("GaConfig: generations must be >= 1");
        if (runs < 1) throw ConfigError("GaConfig: runs must be >= 1");
        if (superpixel < 1) throw ConfigError("GaConfig: superpixel must be >= 1");
    }
};

struct GenomeShape {
    int rows = 12;
    int cols = 12;
    int levels = 16;
};

enum class OptMode { GA, SGA };

inline const char* mode_name(OptMode m) { return m == OptMode::GA ? "GA" : "sGA"; }

struct GenRecord {
    long long best_counts = 0;
    double best_enhancement = 0.0;
    std::uint64_t genome_hash = 0;
};

struct RunTrace {
    std::vector<GenRecord> gen;
    long long flat_baseline_counts = 0; // raw counts over baseline_window_s
    double baseline_window_s = 0.0;
    double t_int_s = 0.0;
    double final_enhancement = 0.0;
    SlmGenome best_genome;
};

// counts = measure(genome, window seconds, stream key)
using MeasureFn = std::function<long long(const SlmGenome&, double, std::uint64_t)>;

struct Objective {
    MeasureFn measure;
    double t_int = 1.0;
    double t_final = 50.0;
    double baseline_window = 50.0;
};

// Final-measurement ratio with the retry rule for a zero flat draw.
inline double final_enhancement_core(const MeasureFn& measure, const SlmGenome& best,
                                     const SlmGenome& flat, double t_final,
                                     std::uint64_t key_best, std::uint64_t key_flat) {
    const long long best_counts = measure(best, t_final, key_best);
    long long flat_counts = measure(flat, t_final, key_flat);
    double window = t_final;
    if (flat_counts == 0) {
        window *= 2.0;
        flat_counts = measure(flat, window, derive_stream(key_flat, {purpose::kFinalFlat}));
        if (flat_counts == 0)
            throw std::runtime_error("final_enhancement: flat counts are zero twice; "
                                     "kappa looks miscalibrated");
    }
    return static_cast<double>(best_counts) / (static_cast<double>(flat_counts) * t_final / window);
}

namespace detail {

struct Individual {
    std::vector<int> genes; // one per orbit representative
    long long fitness = 0;
    bool evaluated = false;
};

// slot index per cell into the representative-gene vector
inline std::vector<int> rep_slots(const OrbitMap& om) {
    std::vector<int> slot_of_root(om.rep_of.size(), -1);
    for (std::size_t s = 0; s < om.reps.size(); ++s) slot_of_root[om.reps[s]] = static_cast<int>(s);
    std::vector<int> slots(om.rep_of.size());
    for (std::size_t i = 0; i < om.rep_of.size(); ++i) slots[i] = slot_of_root[om.rep_of[i]];
    return slots;
}

} // namespace detail

// One optimizer run. Deterministic in (config, shape, mode, run_key): all
// randomness flows through streams keyed by generation/individual.
inline RunTrace evolve(const GaConfig& cfg, const GenomeShape& shape, OptMode mode,
                       const Center& sym_center, const Objective& objective,
                       std::uint64_t run_key) {
    cfg.validate();
    const OrbitMap om = mode == OptMode::SGA
                            ? OrbitMap::inversion(shape.rows, shape.cols, cfg.superpixel, sym_center)
                            : OrbitMap::identity(shape.rows, shape.cols);
    const auto slots = detail::rep_slots(om);
    const int ngenes = static_cast<int>(om.reps.size());

    auto phenotype = [&](const std::vector<int>& genes) {
        SlmGenome g;
        g.rows = shape.rows;
        g.cols = shape.cols;
        g.levels = shape.levels;
        g.superpixel = cfg.superpixel;
        g.gene.resize(static_cast<std::size_t>(shape.rows) * shape.cols);
        for (std::size_t i = 0; i < g.gene.size(); ++i) g.gene[i] = genes[slots[i]];
        if (mode == OptMode::SGA) {
            g.symmetry = Symmetry::Inversion;
            g.center = sym_center;
        }
        return g;
    };

    SlmGenome flat = phenotype(std::vector<int>(ngenes, 0));

    RunTrace trace;
    trace.t_int_s = objective.t_int;
    trace.baseline_window_s = objective.baseline_window;
    trace.flat_baseline_counts =
        objective.measure(flat, objective.baseline_window, derive_stream(run_key, {purpose::kBaseline, 0}));
    if (trace.flat_baseline_counts == 0) {
        trace.baseline_window_s *= 2.0;
        trace.flat_baseline_counts = objective.measure(
            flat, trace.baseline_window_s, derive_stream(run_key, {purpose::kBaseline, 1}));
        if (trace.flat_baseline_counts == 0)
            throw std::runtime_error("evolve: flat baseline is zero twice; kappa looks miscalibrated");
    }
    const double baseline_per_tint = static_cast<double>(trace.flat_baseline_counts) *
                                     objective.t_int / trace.baseline_window_s;

    std::vector<detail::Individual> pop(static_cast<std::size_t>(cfg.population));
    for (int i = 0; i < cfg.population; ++i) {
        RngStream rng(derive_stream(run_key, {purpose::kInit, static_cast<std::uint64_t>(i)}));
        pop[i].genes.resize(ngenes);
        for (int& v : pop[i].genes) v = static_cast<int>(rng.below(shape.levels));
    }

    std::vector<int> order(cfg.population);
    trace.gen.reserve(cfg.generations);
    for (int g = 0; g < cfg.generations; ++g) {
        for (int i = 0; i < cfg.population; ++i) {
            if (pop[i].evaluated) continue;
            pop[i].fitness = objective.measure(
                phenotype(pop[i].genes), objective.t_int,
                derive_stream(run_key, {purpose::kFitness, static_cast<std::uint64_t>(g),
                                        static_cast<std::uint64_t>(i)}));
            pop[i].evaluated = true;
        }
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return pop[a].fitness > pop[b].fitness; });

        const auto& best = pop[order[0]];
        trace.gen.push_back({best.fitness,
                             static_cast<double>(best.fitness) / baseline_per_tint,
                             genome_hash(phenotype(best.genes))});

        if (g + 1 == cfg.generations) break;

        std::vector<detail::Individual> next(static_cast<std::size_t>(cfg.population));
        for (int e = 0; e < cfg.elites; ++e) next[e] = pop[order[e]];
        // linear rank weights: best gets P, worst gets 1
        const double weight_total = 0.5 * cfg.population * (cfg.population + 1);
        auto pick_parent = [&](RngStream& rng) -> const detail::Individual& {
            double u = rng.unit() * weight_total;
            for (int r = 0; r < cfg.population; ++r) {
                const double w = static_cast<double>(cfg.population - r);
                if (u < w) return pop[order[r]];
                u -= w;
            }
            return pop[order[cfg.population - 1]];
        };
        for (int j = cfg.elites; j < cfg.population; ++j) {
            RngStream rng(derive_stream(run_key, {purpose::kChild, static_cast<std::uint64_t>(g),
                                                  static_cast<std::uint64_t>(j)}));
            const auto& ma = pick_parent(rng);
            const auto& pa = pick_parent(rng);
            auto& child = next[j];
            child.genes.resize(ngenes);
            for (int k = 0; k < ngenes; ++k)
                child.genes[k] = rng.unit() < 0.5 ? ma.genes[k] : pa.genes[k];
            for (int k = 0; k < ngenes; ++k)
                if (rng.unit() < cfg.mutation_rate)
                    child.genes[k] = static_cast<int>(rng.below(shape.levels));
            child.evaluated = false;
        }
        pop = std::move(next);
    }

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pop[a].fitness > pop[b].fitness; });
    trace.best_genome = phenotype(pop[order[0]].genes);
    trace.final_enhancement = final_enhancement_core(
        objective.measure, trace.best_genome, flat, objective.t_final,
        derive_stream(run_key, {purpose::kFinalBest}), derive_stream(run_key, {purpose::kFinalFlat}));
    return trace;
}

// Coincidence counts for one displayed genome: the delta-model rate at the
// detector difference coordinate, Poisson-sampled over the window.
inline long long fitness(const SlmGenome& g, const PhaseScreen& diffuser,
                         const TwinPhotonModel& model, const DetectionModel& det,
                         std::uint64_t stream_key) {
    g.validate();
    if (g.rows * g.superpixel != model.spec.n)
        throw ConfigError("fitness: genome does not cover the model grid");
    BeamGeometry geom(model);
    std::vector<double> cell_phase(static_cast<std::size_t>(g.rows) * g.cols);
    for (std::size_t i = 0; i < cell_phase.size(); ++i) cell_phase[i] = level_phase(g.gene[i], g.levels);
    const Vec2 dx{det.x1.cx - det.x2.cx, det.x1.cy - det.x2.cy};
    const int B = g.superpixel;
    const double rate = rate_delta_fn(
        geom,
        [&](int x, int y) {
            return diffuser.at(x, y) + cell_phase[static_cast<std::size_t>(y / B) * g.cols + x / B];
        },
        dx);
    return sample_counts(rate, det, det.t_int, stream_key);
}

// Objective over the 2D delta model with shared precomputed geometry.
struct CoincidenceObjective {
    TwinPhotonModel model;
    PhaseScreen diffuser;
    DetectionModel det;
    BeamGeometry geom;

    CoincidenceObjective(const TwinPhotonModel& m, PhaseScreen diff, const DetectionModel& d)
        : model(m), diffuser(std::move(diff)), det(d), geom(m) {
        det.validate();
        if (!(diffuser.spec == model.spec))
            throw ConfigError("CoincidenceObjective: diffuser grid mismatch");
    }

    long long operator()(const SlmGenome& g, double window, std::uint64_t key) const {
        std::vector<double> cell_phase(static_cast<std::size_t>(g.rows) * g.cols);
        for (std::size_t i = 0; i < cell_phase.size(); ++i)
            cell_phase[i] = level_phase(g.gene[i], g.levels);
        const Vec2 dx{det.x1.cx - det.x2.cx, det.x1.cy - det.x2.cy};
        const int B = g.superpixel;
        const int cols = g.cols;
        const double rate = rate_delta_fn(
            geom,
            [&](int x, int y) {
                return diffuser.at(x, y) + cell_phase[static_cast<std::size_t>(y / B) * cols + x / B];
            },
            dx);
        return sample_counts(rate, det, window, key);
    }

    Objective objective() const {
        return Objective{*this, det.t_int, det.t_final, det.t_final};
    }
};

// Objective over the 1D finite-sigma_plus model with co-displaced detectors.
struct Displaced1DObjective {
    BeamModel1D model;
    std::vector<double> diffuser;
    DetectionModel det;
    double x1 = 0.0;
    double x2 = 0.0;
    FullEngine1D engine;

    Displaced1DObjective(const BeamModel1D& m, std::vector<double> diff, const DetectionModel& d,
                         double det_x1, double det_x2)
        : model(m), diffuser(std::move(diff)), det(d), x1(det_x1), x2(det_x2), engine(m) {
        det.validate();
        if (diffuser.size() != static_cast<std::size_t>(m.n))
            throw ConfigError("Displaced1DObjective: diffuser length mismatch");
    }

    long long operator()(const SlmGenome& g, double window, std::uint64_t key) const {
        auto profile = expand_genome_row(g);
        if (profile.size() != diffuser.size())
            throw ConfigError("Displaced1DObjective: genome does not cover the grid");
        for (std::size_t i = 0; i < profile.size(); ++i) profile[i] += diffuser[i];
        const double rate = engine.rate(profile, x1, x2);
        return sample_counts(rate, det, window, key);
    }

    Objective objective() const {
        return Objective{*this, det.t_int, det.t_final, det.t_final};
    }
};

// Spec-shaped wrapper: 50 s-window count ratio best vs flat.
inline double final_enhancement(const SlmGenome& best, const PhaseScreen& diffuser,
                                const TwinPhotonModel& model, const DetectionModel& det,
                                std::uint64_t stream_key) {
    CoincidenceObjective obj(model, diffuser, det);
    SlmGenome flat = best;
    std::fill(flat.gene.begin(), flat.gene.end(), 0);
    return final_enhancement_core(MeasureFn(obj), best, flat, det.t_final,
                                  derive_stream(stream_key, {purpose::kFinalBest}),
                                  derive_stream(stream_key, {purpose::kFinalFlat}));
}

} // namespace twincorr

#endif
