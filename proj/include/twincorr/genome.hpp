#ifndef TWINCORR_GENOME_HPP
#define TWINCORR_GENOME_HPP

// Discrete super-pixel SLM genomes and the inversion-symmetry machinery.
// A genome cell covers a superpixel x superpixel block of SLM pixels and
// holds one of L equispaced phase levels (level l -> phase 2*pi*l/L).

#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "twincorr/errors.hpp"
#include "twincorr/grid.hpp"

namespace twincorr {

enum class Symmetry { None, Inversion };

struct SlmGenome {
    int rows = 0;
    int cols = 0;
    int levels = 16;    // L
    int superpixel = 8; // SLM pixels per cell side
    std::vector<int> gene; // rows*cols, values in {0..L-1}, row-major
    Symmetry symmetry = Symmetry::None;
    Center center{}; // inversion center in expanded-screen pixel coordinates

    int cell(int r, int c) const { return gene[static_cast<std::size_t>(r) * cols + c]; }
    int& cell(int r, int c) { return gene[static_cast<std::size_t>(r) * cols + c]; }

    void validate() const {
        if (rows < 1 || cols < 1) throw ConfigError("SlmGenome: empty grid");
        if (levels < 2) throw ConfigError("SlmGenome: need at least 2 levels");
        if (superpixel < 1) throw ConfigError("SlmGenome: superpixel must be >= 1");
        if (gene.size() != static_cast<std::size_t>(rows) * cols)
            throw ConfigError("SlmGenome: gene array size mismatch");
        for (int g : gene)
            if (g < 0 || g >= levels) throw ConfigError("SlmGenome: level out of range");
    }
};

inline double level_phase(int level, int levels) {
    return 2.0 * std::numbers::pi * static_cast<double>(level) / static_cast<double>(levels);
}

// Reflection of a super-pixel index about a pixel-space center: mirror the
// cell's center pixel and round to the nearest cell (ties to lower index).
inline int mirror_super(double center_px, int idx, int superpixel) {
    const double cell_center = superpixel * idx + 0.5 * (superpixel - 1);
    const double reflected = 2.0 * center_px - cell_center;
    return round_half_down((reflected - 0.5 * (superpixel - 1)) / superpixel);
}

// Orbits of cells under the (rounded) inversion map, as union-find
// components. Cells whose mirror rounds off-grid stay singletons. Rounding
// of fractional centers can make the map non-involutive; components absorb
// that cleanly.
struct OrbitMap {
    int rows = 0, cols = 0;
    std::vector<int> rep_of; // cell -> smallest cell index in its orbit
    std::vector<int> reps;   // sorted unique representatives

    static OrbitMap identity(int rows, int cols) {
        OrbitMap m;
        m.rows = rows;
        m.cols = cols;
        m.rep_of.resize(static_cast<std::size_t>(rows) * cols);
        std::iota(m.rep_of.begin(), m.rep_of.end(), 0);
        m.reps = m.rep_of;
        return m;
    }

    static OrbitMap inversion(int rows, int cols, int superpixel, const Center& c) {
        const int nc = rows * cols;
        std::vector<int> parent(nc);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        auto unite = [&](int a, int b) {
            a = find(a);
            b = find(b);
            if (a == b) return;
            if (a > b) std::swap(a, b); // keep the smallest index as root
            parent[b] = a;
        };
        for (int r = 0; r < rows; ++r) {
            const int mr = mirror_super(c.cy, r, superpixel);
            if (mr < 0 || mr >= rows) continue;
            for (int cc = 0; cc < cols; ++cc) {
                const int mc = mirror_super(c.cx, cc, superpixel);
                if (mc < 0 || mc >= cols) continue;
                unite(r * cols + cc, mr * cols + mc);
            }
        }
        OrbitMap m;
        m.rows = rows;
        m.cols = cols;
        m.rep_of.resize(nc);
        for (int i = 0; i < nc; ++i) m.rep_of[i] = find(i);
        m.reps.clear();
        for (int i = 0; i < nc; ++i)
            if (m.rep_of[i] == i) m.reps.push_back(i);
        return m;
    }
};

inline OrbitMap orbit_map_for(const SlmGenome& g) {
    return g.symmetry == Symmetry::Inversion
               ? OrbitMap::inversion(g.rows, g.cols, g.superpixel, g.center)
               : OrbitMap::identity(g.rows, g.cols);
}

inline int free_parameter_count(const SlmGenome& g) {
    g.validate();
    if (g.symmetry == Symmetry::None) return g.rows * g.cols;
    return static_cast<int>(orbit_map_for(g).reps.size());
}

// Copy each orbit representative's level onto its whole orbit. Idempotent;
// the result satisfies level(p) == level(mirror_super(p)) wherever the
// mirror is in range.
inline SlmGenome symmetrize(SlmGenome g, const Center& c) {
    g.validate();
    const OrbitMap m = OrbitMap::inversion(g.rows, g.cols, g.superpixel, c);
    for (std::size_t i = 0; i < g.gene.size(); ++i) g.gene[i] = g.gene[m.rep_of[i]];
    g.symmetry = Symmetry::Inversion;
    g.center = c;
    return g;
}

inline bool satisfies_inversion(const SlmGenome& g, const Center& c) {
    for (int r = 0; r < g.rows; ++r) {
        const int mr = mirror_super(c.cy, r, g.superpixel);
        if (mr < 0 || mr >= g.rows) continue;
        for (int cc = 0; cc < g.cols; ++cc) {
            const int mc = mirror_super(c.cx, cc, g.superpixel);
            if (mc < 0 || mc >= g.cols) continue;
            if (g.cell(r, cc) != g.cell(mr, mc)) return false;
        }
    }
    return true;
}

// Block-constant expansion onto an n x n screen, n = rows * superpixel.
inline PhaseScreen expand_genome(const SlmGenome& g, double pitch = 1.0) {
    g.validate();
    if (g.rows != g.cols)
        throw ConfigError("expand_genome: genome must be square for a square screen");
    GridSpec spec{g.rows * g.superpixel, pitch};
    spec.validate();
    PhaseScreen out(spec, 0.0);
    for (int y = 0; y < spec.n; ++y) {
        const int r = y / g.superpixel;
        for (int x = 0; x < spec.n; ++x)
            out.at(x, y) = level_phase(g.cell(r, x / g.superpixel), g.levels);
    }
    return out;
}

// Single-row expansion for the 1D lane: length cols * superpixel.
inline std::vector<double> expand_genome_row(const SlmGenome& g) {
    g.validate();
    if (g.rows != 1) throw ConfigError("expand_genome_row: genome must have one row");
    std::vector<double> out(static_cast<std::size_t>(g.cols) * g.superpixel);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = level_phase(g.gene[i / g.superpixel], g.levels);
    return out;
}

// FNV-1a over the level bytes; used for trace records and tables.
inline std::uint64_t genome_hash(const SlmGenome& g) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto eat = [&](std::uint64_t x) {
        for (int b = 0; b < 8; ++b) {
            h ^= (x >> (8 * b)) & 0xFF;
            h *= 0x100000001B3ull;
        }
    };
    eat(static_cast<std::uint64_t>(g.rows));
    eat(static_cast<std::uint64_t>(g.cols));
    for (int v : g.gene) eat(static_cast<std::uint64_t>(v));
    return h;
}

} // namespace twincorr

#endif
