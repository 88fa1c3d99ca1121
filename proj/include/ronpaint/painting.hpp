#pragma once

// Painting explanations onto structures: per-atom and per-bond scores from
// feature weights, a deterministic 2-D layout, and SVG output colored on a
// blue-white-red scale (-1 blue, 0 white, +1 red).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "ronpaint/error.hpp"
#include "ronpaint/lime.hpp"
#include "ronpaint/molgraph.hpp"
#include "ronpaint/patterns.hpp"
#include "ronpaint/rng.hpp"

namespace ronpaint {

// ------------------------------------------------------------------ scores

struct AtomScores {
    std::vector<double> raw;
    std::vector<double> normalized;
    std::vector<double> bond_raw;
    std::vector<double> bond_normalized;
};

/// Divides by the largest magnitude; an all-zero vector stays all zero.
inline std::vector<double> normalize_scores(const std::vector<double>& raw) {
    double m = 0.0;
    for (double v : raw) m = std::max(m, std::abs(v));
    std::vector<double> out(raw.size(), 0.0);
    if (m > 0.0)
        for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / m;
    return out;
}

/// Each weighted feature adds its weight once to every atom (bond) covered by
/// any of its embeddings. `matches` is indexed by feature.
inline AtomScores project_weights(const Molecule& mol, const std::vector<MatchSet>& matches,
                                  const std::map<std::size_t, double>& weights) {
    AtomScores s;
    s.raw.assign(mol.atom_count(), 0.0);
    s.bond_raw.assign(mol.bond_count(), 0.0);
    for (const auto& [f, w] : weights) {
        if (f >= matches.size() || matches[f].empty())
            throw InputError("feature " + std::to_string(f) +
                             (f < matches.size() ? " ('" + matches[f].pattern_id + "')" : std::string()) +
                             " carries a weight but does not occur in the molecule");
        for (auto a : matches[f].matched_atoms) s.raw.at(a) += w;
        for (auto b : matches[f].matched_bonds) s.bond_raw.at(b) += w;
    }
    s.normalized = normalize_scores(s.raw);
    s.bond_normalized = normalize_scores(s.bond_raw);
    return s;
}

inline AtomScores project_weights(const Molecule& mol, const std::vector<MatchSet>& matches, const Explanation& e) {
    return project_weights(mol, matches, e.weights);
}

// ------------------------------------------------------------------ colors

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    bool operator==(const Rgb&) const = default;
};

/// Linear blend through blue (-1), white (0) and red (+1).
inline Rgb score_color(double s) {
    if (!(s == s)) s = 0.0;
    s = std::clamp(s, -1.0, 1.0);
    if (s < 0.0) {
        const auto v = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 + s)));
        return {v, v, 255};
    }
    const auto v = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - s)));
    return {255, v, v};
}

inline std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
    return buf;
}

// ------------------------------------------------------------------ layout

struct Point {
    double x = 0.0, y = 0.0;
    bool operator==(const Point&) const = default;
};

struct Layout {
    std::vector<Point> coords;
    bool operator==(const Layout&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double min_interatomic_distance(const Layout& l) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l.coords.size(); ++i)
        for (std::size_t j = i + 1; j < l.coords.size(); ++j) best = std::min(best, distance(l.coords[i], l.coords[j]));
    return best;
}

namespace detail {

/// Minimum cycle basis candidates: for every ring bond, the shortest cycle
/// through it, then a greedy GF(2)-independent subset, smallest first. Each
/// cycle lists atoms in ring order.
inline std::vector<std::vector<std::size_t>> ring_cycles(const Molecule& mol) {
    const auto rb = ring_bonds(mol);
    const std::size_t n = mol.atom_count();
    struct Candidate {
        std::vector<std::size_t> atoms;
        std::vector<std::size_t> bonds;  // sorted
    };
    std::vector<Candidate> cands;
    std::set<std::vector<std::size_t>> seen;
    for (auto e : rb) {
        const auto& bond = mol.bond(e);
        std::vector<long> prev(n, -1);
        std::vector<char> visited(n, 0);
        std::vector<std::size_t> queue{bond.begin};
        visited[bond.begin] = 1;
        for (std::size_t qi = 0; qi < queue.size() && !visited[bond.end]; ++qi) {
            const auto a = queue[qi];
            for (const auto& nb : mol.neighbors(a)) {
                if (nb.bond == e || !rb.count(nb.bond) || visited[nb.atom]) continue;
                visited[nb.atom] = 1;
                prev[nb.atom] = static_cast<long>(a);
                queue.push_back(nb.atom);
            }
        }
        if (!visited[bond.end]) continue;
        Candidate c;
        for (long a = static_cast<long>(bond.end); a >= 0; a = prev[a]) c.atoms.push_back(static_cast<std::size_t>(a));
        for (std::size_t i = 0; i < c.atoms.size(); ++i)
            c.bonds.push_back(*mol.bond_between(c.atoms[i], c.atoms[(i + 1) % c.atoms.size()]));
        std::sort(c.bonds.begin(), c.bonds.end());
        if (seen.insert(c.bonds).second) cands.push_back(std::move(c));
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.atoms.size() != b.atoms.size() ? a.atoms.size() < b.atoms.size() : a.bonds < b.bonds;
    });

    const std::size_t words = (mol.bond_count() + 63) / 64;
    std::vector<std::pair<std::size_t, std::vector<std::uint64_t>>> basis;  // (pivot bit, vector)
    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : cands) {
        std::vector<std::uint64_t> v(words, 0);
        for (auto b : c.bonds) v[b / 64] |= std::uint64_t{1} << (b % 64);
        for (const auto& [pivot, bv] : basis)
            if (v[pivot / 64] >> (pivot % 64) & 1)
                for (std::size_t w = 0; w < words; ++w) v[w] ^= bv[w];
        std::size_t pivot = SIZE_MAX;
        for (std::size_t w = words; w-- > 0 && pivot == SIZE_MAX;)
            if (v[w]) pivot = w * 64 + 63 - static_cast<std::size_t>(__builtin_clzll(v[w]));
        if (pivot == SIZE_MAX) continue;
        // Keep the basis reduced so later reductions stay single-pass.
        for (auto& [p, bv] : basis)
            if (bv[pivot / 64] >> (pivot % 64) & 1)
                for (std::size_t w = 0; w < words; ++w) bv[w] ^= v[w];
        basis.emplace_back(pivot, std::move(v));
        out.push_back(c.atoms);
    }
    return out;
}

inline Point unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

class LayoutBuilder {
public:
    LayoutBuilder(const Molecule& mol, std::uint64_t seed)
        : mol_(mol), n_(mol.atom_count()), pos_(n_), placed_(n_, 0), turn_(n_, 1), seed_(seed) {}

    Layout run() {
        if (n_ == 0) return {};
        const auto cycles = ring_cycles(mol_);
        std::vector<char> ring_done(cycles.size(), 0);
        if (!cycles.empty()) {
            place_free_ring(cycles[0]);
            ring_done[0] = 1;
        } else {
            place(0, {0.0, 0.0});
        }
        while (placed_count_ < n_) {
            bool progress = false;
            for (std::size_t c = 0; c < cycles.size() && !progress; ++c) {
                if (ring_done[c]) continue;
                std::size_t p = 0;
                for (auto a : cycles[c]) p += placed_[a];
                if (p == cycles[c].size()) ring_done[c] = 1;
                if (p == 0 || p == cycles[c].size()) continue;
                place_partial_ring(cycles[c]);
                ring_done[c] = 1;
                progress = true;
            }
            if (progress) continue;
            for (std::size_t a = 0; a < n_ && !progress; ++a) {
                if (!placed_[a]) continue;
                for (const auto& nb : mol_.neighbors(a))
                    if (!placed_[nb.atom]) {
                        grow(a);
                        progress = true;
                        break;
                    }
            }
            if (!progress) throw InvariantError("layout could not reach every atom");
        }
        relax(200, 1.0);
        for (int extra = 0; extra < 10 && min_interatomic_distance({pos_}) < 0.5; ++extra) relax(100, 1.0);
        const double dmin = min_interatomic_distance({pos_});
        if (dmin < 0.5) {
            // Last resort: uniform scaling preserves the drawing and restores the spacing.
            const double s = 0.55 / std::max(dmin, 1e-3);
            for (auto& p : pos_) p = {p.x * s, p.y * s};
        }
        return {pos_};
    }

private:
    void place(std::size_t a, Point p) {
        pos_[a] = p;
        if (!placed_[a]) ++placed_count_;
        placed_[a] = 1;
    }

    void place_free_ring(const std::vector<std::size_t>& ring) {
        const std::size_t k = ring.size();
        const double R = 1.0 / (2.0 * std::sin(std::numbers::pi / static_cast<double>(k)));
        const double step = 2.0 * std::numbers::pi / static_cast<double>(k);
        const double start = -std::numbers::pi / 2.0 - step / 2.0;
        for (std::size_t i = 0; i < k; ++i) {
            const auto u = unit_from_angle(start + step * static_cast<double>(i));
            place(ring[i], {R * u.x, R * u.y});
        }
    }

    // Direction pointing away from the already placed neighbors of `a`.
    Point outward(std::size_t a) const {
        Point sum{0.0, 0.0};
        std::size_t count = 0;
        Point first{1.0, 0.0};
        for (const auto& nb : mol_.neighbors(a)) {
            if (!placed_[nb.atom]) continue;
            const double d = distance(pos_[a], pos_[nb.atom]);
            if (d < 1e-12) continue;
            const Point u{(pos_[nb.atom].x - pos_[a].x) / d, (pos_[nb.atom].y - pos_[a].y) / d};
            if (count == 0) first = u;
            sum.x -= u.x;
            sum.y -= u.y;
            ++count;
        }
        if (count == 0) return {1.0, 0.0};
        const double len = std::hypot(sum.x, sum.y);
        if (len < 1e-9) return {-first.y, first.x};
        return {sum.x / len, sum.y / len};
    }

    void place_partial_ring(const std::vector<std::size_t>& ring) {
        const std::size_t k = ring.size();
        std::vector<std::size_t> placed_pos;
        for (std::size_t i = 0; i < k; ++i)
            if (placed_[ring[i]]) placed_pos.push_back(i);

        if (placed_pos.size() == 1) {
            // Ring hanging off one atom: polygon on the outward side.
            const std::size_t i0 = placed_pos[0];
            const std::size_t r = ring[i0];
            const auto dir = outward(r);
            const double R = 1.0 / (2.0 * std::sin(std::numbers::pi / static_cast<double>(k)));
            const Point c{pos_[r].x + R * dir.x, pos_[r].y + R * dir.y};
            const double phi0 = std::atan2(pos_[r].y - c.y, pos_[r].x - c.x);
            const double step = 2.0 * std::numbers::pi / static_cast<double>(k);
            for (std::size_t j = 1; j < k; ++j) {
                const auto u = unit_from_angle(phi0 + step * static_cast<double>(j));
                place(ring[(i0 + j) % k], {c.x + R * u.x, c.y + R * u.y});
            }
            return;
        }

        const bool fused = placed_pos.size() == 2 &&
                           ((placed_pos[1] - placed_pos[0]) == 1 || (placed_pos[0] == 0 && placed_pos[1] == k - 1));
        if (fused) {
            // Share the edge A-B and put the new polygon on the far side from A's and B's other neighbors.
            // The unplaced run follows ring[ib] and precedes ring[ia].
            std::size_t ia = placed_pos[0], ib = placed_pos[1];
            if (ia == 0 && ib == k - 1) std::swap(ia, ib);
            const std::size_t A = ring[ib], B = ring[ia];
            const Point pa = pos_[A], pb = pos_[B];
            const double edge = distance(pa, pb);
            const Point mid{(pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0};
            Point nrm{-(pb.y - pa.y) / edge, (pb.x - pa.x) / edge};
            Point ref{0.0, 0.0};
            std::size_t count = 0;
            for (auto end : {A, B})
                for (const auto& nb : mol_.neighbors(end)) {
                    if (!placed_[nb.atom] || nb.atom == A || nb.atom == B) continue;
                    ref.x += pos_[nb.atom].x;
                    ref.y += pos_[nb.atom].y;
                    ++count;
                }
            if (count) {
                ref = {ref.x / count, ref.y / count};
                if ((ref.x - mid.x) * nrm.x + (ref.y - mid.y) * nrm.y > 0.0) nrm = {-nrm.x, -nrm.y};
            }
            const double kd = static_cast<double>(k);
            const double apothem = edge / (2.0 * std::tan(std::numbers::pi / kd));
            const double R = edge / (2.0 * std::sin(std::numbers::pi / kd));
            const Point c{mid.x + apothem * nrm.x, mid.y + apothem * nrm.y};
            const double step = 2.0 * std::numbers::pi / kd;
            const double ang_a = std::atan2(pa.y - c.y, pa.x - c.x);
            // B sits one step from A; the new atoms go the other way round.
            double s = 1.0;
            const auto probe = unit_from_angle(ang_a + step);
            if (std::hypot(c.x + R * probe.x - pb.x, c.y + R * probe.y - pb.y) < 1e-6 * std::max(1.0, edge)) s = -1.0;
            for (std::size_t j = 1; j + 1 < k; ++j) {
                const auto u = unit_from_angle(ang_a + s * step * static_cast<double>(j));
                place(ring[(ib + j) % k], {c.x + R * u.x, c.y + R * u.y});
            }
            return;
        }

        // Bridged or otherwise constrained: each unplaced run spans the chord
        // between its placed ends with a small bulge; relaxation tidies it.
        for (std::size_t start = 0; start < k; ++start) {
            if (!placed_[ring[start]] || placed_[ring[(start + 1) % k]]) continue;
            std::vector<std::size_t> run;
            std::size_t j = (start + 1) % k;
            while (!placed_[ring[j]]) {
                run.push_back(ring[j]);
                j = (j + 1) % k;
            }
            const Point pa = pos_[ring[start]], pb = pos_[ring[j]];
            Point nrm{-(pb.y - pa.y), pb.x - pa.x};
            double len = std::hypot(nrm.x, nrm.y);
            if (len < 1e-9) {
                nrm = outward(ring[start]);
            } else {
                nrm = {nrm.x / len, nrm.y / len};
                Point ref{0.0, 0.0};
                std::size_t count = 0;
                for (auto p : placed_pos) {
                    if (ring[p] == ring[start] || ring[p] == ring[j]) continue;
                    ref.x += pos_[ring[p]].x;
                    ref.y += pos_[ring[p]].y;
                    ++count;
                }
                if (count && (ref.x / count - pa.x) * nrm.x + (ref.y / count - pa.y) * nrm.y > 0.0)
                    nrm = {-nrm.x, -nrm.y};
            }
            const double m = static_cast<double>(run.size());
            for (std::size_t i = 0; i < run.size(); ++i) {
                const double t = static_cast<double>(i + 1) / (m + 1.0);
                const double bulge = 0.35 * std::sin(std::numbers::pi * t) * std::max(1.0, m / 2.0);
                place(run[i], {pa.x + t * (pb.x - pa.x) + bulge * nrm.x, pa.y + t * (pb.y - pa.y) + bulge * nrm.y});
            }
        }
    }

    bool is_linear_center(std::size_t a) const {
        std::size_t doubles = 0;
        for (const auto& nb : mol_.neighbors(a)) {
            const auto o = mol_.bond(nb.bond).order;
            if (o == BondOrder::triple) return true;
            doubles += o == BondOrder::double_;
        }
        return doubles >= 2;
    }

    // Places every unplaced neighbor of `a`.
    void grow(std::size_t a) {
        std::vector<std::size_t> kids, parents;
        for (const auto& nb : mol_.neighbors(a)) (placed_[nb.atom] ? parents : kids).push_back(nb.atom);
        const double pi = std::numbers::pi;
        const double deg = pi / 180.0;
        std::vector<double> angles;
        std::vector<int> turns;
        if (parents.empty()) {
            const double base = -30.0 * deg;
            const double step = kids.size() <= 3 ? 120.0 * deg : 2.0 * pi / static_cast<double>(kids.size());
            for (std::size_t i = 0; i < kids.size(); ++i) {
                angles.push_back(base + step * static_cast<double>(i));
                turns.push_back(1);
            }
        } else if (parents.size() == 1) {
            const auto p = parents[0];
            const double in = std::atan2(pos_[a].y - pos_[p].y, pos_[a].x - pos_[p].x);
            if (kids.size() == 1 && is_linear_center(a)) {
                angles.push_back(in);
                turns.push_back(turn_[a]);
            } else if (kids.size() == 1) {
                angles.push_back(in + turn_[a] * 60.0 * deg);
                turns.push_back(-turn_[a]);
            } else if (kids.size() == 2) {
                angles = {in + turn_[a] * 60.0 * deg, in - turn_[a] * 60.0 * deg};
                turns = {-turn_[a], turn_[a]};
            } else {
                const double spread = kids.size() == 3 ? 90.0 * deg : 2.0 * pi / static_cast<double>(kids.size() + 1);
                const double first = in - spread * static_cast<double>(kids.size() - 1) / 2.0;
                for (std::size_t i = 0; i < kids.size(); ++i) {
                    angles.push_back(first + spread * static_cast<double>(i));
                    turns.push_back(i % 2 ? 1 : -1);
                }
            }
        } else {
            const auto out = outward(a);
            const double o = std::atan2(out.y, out.x);
            const double spread = kids.size() <= 2 ? 60.0 * deg : 40.0 * deg;
            const double first = o - spread * static_cast<double>(kids.size() - 1) / 2.0;
            for (std::size_t i = 0; i < kids.size(); ++i) {
                angles.push_back(first + spread * static_cast<double>(i));
                turns.push_back(1);
            }
        }
        for (std::size_t i = 0; i < kids.size(); ++i) {
            const auto u = unit_from_angle(angles[i]);
            place(kids[i], {pos_[a].x + u.x, pos_[a].y + u.y});
            turn_[kids[i]] = turns[i];
        }
    }

    // Springs pull bonds toward unit length; non-bonded pairs closer than
    // `reach` push apart. Exactly placed ideal geometry feels no force.
    void relax(int iterations, double reach) {
        std::vector<std::vector<char>> bonded(n_, std::vector<char>(n_, 0));
        for (const auto& b : mol_.bonds()) bonded[b.begin][b.end] = bonded[b.end][b.begin] = 1;
        for (int it = 0; it < iterations; ++it) {
            std::vector<Point> disp(n_);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double dx = pos_[j].x - pos_[i].x, dy = pos_[j].y - pos_[i].y;
                    const double d = std::hypot(dx, dy);
                    Point u;
                    if (d < 1e-6) {
                        Rng rng(derive_seed(seed_, (static_cast<std::uint64_t>(it) * n_ + i) * n_ + j));
                        u = unit_from_angle(2.0 * std::numbers::pi * rng.uniform());
                    } else {
                        u = {dx / d, dy / d};
                    }
                    double f = 0.0;
                    if (bonded[i][j])
                        f = 0.5 * (d - 1.0);
                    else if (d < reach)
                        f = -0.5 * (reach - d);
                    if (f == 0.0) continue;
                    disp[i].x += f * u.x;
                    disp[i].y += f * u.y;
                    disp[j].x -= f * u.x;
                    disp[j].y -= f * u.y;
                }
            for (std::size_t i = 0; i < n_; ++i) {
                const double len = std::hypot(disp[i].x, disp[i].y);
                const double cap = len > 0.25 ? 0.25 / len : 1.0;
                pos_[i].x += disp[i].x * cap;
                pos_[i].y += disp[i].y * cap;
            }
        }
    }

    const Molecule& mol_;
    std::size_t n_;
    std::vector<Point> pos_;
    std::vector<char> placed_;
    std::vector<int> turn_;
    std::size_t placed_count_ = 0;
    std::uint64_t seed_;
};

}  // namespace detail

/// Rings become regular polygons (fused rings share an edge), chains zigzag
/// at 120 degrees, then a fixed relaxation removes overlaps. Coordinates are
/// in bond lengths.
inline Layout compute_layout(const Molecule& mol, std::uint64_t seed = 0) {
    if (mol.atom_count() > 100) throw InputError("layout supports at most 100 atoms");
    return detail::LayoutBuilder(mol, seed).run();
}

// ----------------------------------------------------------------- drawing

struct LegendRow {
    std::string pattern_id;
    std::string pattern;
    double weight = 0.0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0;
    double importance = 0.0;
};

struct RenderOptions {
    double scale = 40.0;   // pixels per bond length
    double margin = 30.0;  // pixels
    std::string title;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

inline std::string num3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string atom_label(const Atom& a) {
    std::string s = element_symbol(a.atomic_number);
    if (a.formal_charge > 0) s += a.formal_charge == 1 ? "+" : std::to_string(a.formal_charge) + "+";
    if (a.formal_charge < 0) s += a.formal_charge == -1 ? "-" : std::to_string(-a.formal_charge) + "-";
    return s;
}

struct Box {
    double minx = 0, miny = 0, maxx = 0, maxy = 0;
    double width() const { return maxx - minx; }
    double height() const { return maxy - miny; }
};

inline Box bounds(const Layout& l) {
    Box b;
    if (l.coords.empty()) return b;
    b.minx = b.maxx = l.coords[0].x;
    b.miny = b.maxy = l.coords[0].y;
    for (const auto& p : l.coords) {
        b.minx = std::min(b.minx, p.x);
        b.maxx = std::max(b.maxx, p.x);
        b.miny = std::min(b.miny, p.y);
        b.maxy = std::max(b.maxy, p.y);
    }
    return b;
}

inline void check_sizes(const Molecule& mol, const Layout& layout, const AtomScores& scores) {
    if (layout.coords.size() != mol.atom_count() || scores.normalized.size() != mol.atom_count() ||
        scores.bond_normalized.size() != mol.bond_count())
        throw InputError("layout or scores do not match the molecule");
}

// Molecule drawing with its bounding box's top-left at (ox, oy).
inline void draw_molecule(std::string& out, const Molecule& mol, const Layout& layout, const AtomScores& scores,
                          double scale, double ox, double oy, const std::string& indent) {
    const Box box = bounds(layout);
    auto X = [&](std::size_t i) { return ox + (layout.coords[i].x - box.minx) * scale; };
    auto Y = [&](std::size_t i) { return oy + (box.maxy - layout.coords[i].y) * scale; };
    const double disc = 0.3 * scale;

    out += indent + "<g class=\"bond-scores\" stroke-linecap=\"round\">\n";
    for (std::size_t b = 0; b < mol.bond_count(); ++b) {
        const auto& bond = mol.bond(b);
        out += indent + "  <line data-bond=\"" + std::to_string(b) + "\" x1=\"" + num(X(bond.begin)) + "\" y1=\"" +
               num(Y(bond.begin)) + "\" x2=\"" + num(X(bond.end)) + "\" y2=\"" + num(Y(bond.end)) + "\" stroke=\"" +
               hex_color(score_color(scores.bond_normalized[b])) + "\" stroke-width=\"" + num(0.25 * scale) +
               "\"/>\n";
    }
    out += indent + "</g>\n";

    out += indent + "<g class=\"atom-scores\" stroke=\"#999999\" stroke-width=\"0.50\">\n";
    for (std::size_t a = 0; a < mol.atom_count(); ++a)
        out += indent + "  <circle data-atom=\"" + std::to_string(a) + "\" cx=\"" + num(X(a)) + "\" cy=\"" + num(Y(a)) +
               "\" r=\"" + num(disc) + "\" fill=\"" + hex_color(score_color(scores.normalized[a])) + "\"/>\n";
    out += indent + "</g>\n";

    out += indent + "<g class=\"bonds\" stroke=\"#000000\" stroke-width=\"1.50\">\n";
    for (std::size_t b = 0; b < mol.bond_count(); ++b) {
        const auto& bond = mol.bond(b);
        double x1 = X(bond.begin), y1 = Y(bond.begin), x2 = X(bond.end), y2 = Y(bond.end);
        const double len = std::hypot(x2 - x1, y2 - y1);
        if (len < 1e-9) continue;
        const double ux = (x2 - x1) / len, uy = (y2 - y1) / len;
        // Leave room for element labels.
        const double trim = 0.3 * scale;
        if (mol.atom(bond.begin).atomic_number != 6) {
            x1 += ux * trim;
            y1 += uy * trim;
        }
        if (mol.atom(bond.end).atomic_number != 6) {
            x2 -= ux * trim;
            y2 -= uy * trim;
        }
        const double px = -uy, py = ux;
        auto line = [&](double off, bool dashed) {
            out += indent + "  <line x1=\"" + num(x1 + px * off) + "\" y1=\"" + num(y1 + py * off) + "\" x2=\"" +
                   num(x2 + px * off) + "\" y2=\"" + num(y2 + py * off) + "\"" +
                   (dashed ? " stroke-dasharray=\"3,2\"" : "") + "/>\n";
        };
        const double gap = 0.08 * scale;
        switch (bond.order) {
            case BondOrder::single: line(0.0, false); break;
            case BondOrder::double_:
                line(-gap, false);
                line(gap, false);
                break;
            case BondOrder::triple:
                line(-1.5 * gap, false);
                line(0.0, false);
                line(1.5 * gap, false);
                break;
            case BondOrder::aromatic:
                line(-gap, false);
                line(gap, true);
                break;
        }
    }
    out += indent + "</g>\n";

    out += indent + "<g class=\"labels\" font-family=\"sans-serif\" font-size=\"" + num(0.35 * scale) +
           "\" text-anchor=\"middle\" dominant-baseline=\"central\">\n";
    for (std::size_t a = 0; a < mol.atom_count(); ++a) {
        if (mol.atom(a).atomic_number == 6 && mol.atom(a).formal_charge == 0) continue;
        out += indent + "  <text x=\"" + num(X(a)) + "\" y=\"" + num(Y(a)) + "\">" +
               xml_escape(atom_label(mol.atom(a))) + "</text>\n";
    }
    out += indent + "</g>\n";
}

}  // namespace detail

/// Single-molecule drawing with a legend table to the right of the structure.
inline std::string render_svg(const Molecule& mol, const Layout& layout, const AtomScores& scores,
                              const std::vector<LegendRow>& legend = {}, const RenderOptions& opt = {}) {
    detail::check_sizes(mol, layout, scores);
    using detail::num;
    using detail::num3;
    const auto box = detail::bounds(layout);
    const double mol_w = box.width() * opt.scale + 2 * opt.margin;
    const double mol_h = box.height() * opt.scale + 2 * opt.margin;
    const double title_h = opt.title.empty() ? 0.0 : 24.0;
    const double row_h = 18.0;
    const double legend_w = legend.empty() ? 0.0 : 560.0;
    const double legend_h = legend.empty() ? 0.0 : (legend.size() + 1) * row_h + 2 * opt.margin;
    const double width = mol_w + legend_w;
    const double height = std::max(mol_h, legend_h) + title_h;

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "  <rect width=\"100%\" height=\"100%\" fill=\"#FFFFFF\"/>\n";
    if (!opt.title.empty())
        out += "  <text x=\"" + num(opt.margin) + "\" y=\"18.00\" font-family=\"sans-serif\" font-size=\"14.00\">" +
               detail::xml_escape(opt.title) + "</text>\n";
    out += "  <g class=\"molecule\">\n";
    detail::draw_molecule(out, mol, layout, scores, opt.scale, opt.margin, opt.margin + title_h, "    ");
    out += "  </g>\n";

    if (!legend.empty()) {
        double wmax = 0.0;
        for (const auto& r : legend) wmax = std::max(wmax, std::abs(r.weight));
        const double x0 = mol_w;
        const double y0 = opt.margin + title_h;
        const double cols[] = {x0 + 18, x0 + 230, x0 + 300, x0 + 370, x0 + 440, x0 + 500};
        out += "  <g class=\"legend\" font-family=\"monospace\" font-size=\"11.00\">\n";
        const char* headers[] = {"pattern", "weight", "accuracy", "precision", "recall", "importance"};
        for (int c = 0; c < 6; ++c)
            out += "    <text x=\"" + num(cols[c]) + "\" y=\"" + num(y0) + "\" font-weight=\"bold\">" + headers[c] +
                   "</text>\n";
        for (std::size_t i = 0; i < legend.size(); ++i) {
            const auto& r = legend[i];
            const double y = y0 + row_h * static_cast<double>(i + 1);
            const double norm = wmax > 0.0 ? r.weight / wmax : 0.0;
            out += "    <rect x=\"" + num(x0) + "\" y=\"" + num(y - 10) + "\" width=\"12.00\" height=\"12.00\" fill=\"" +
                   hex_color(score_color(norm)) + "\" stroke=\"#999999\"/>\n";
            const std::string name = r.pattern.empty() ? r.pattern_id : r.pattern_id + " " + r.pattern;
            const std::string cells[] = {detail::xml_escape(name), num3(r.weight), num3(r.accuracy),
                                         num3(r.precision),        num3(r.recall), num3(r.importance)};
            for (int c = 0; c < 6; ++c)
                out += "    <text x=\"" + num(cols[c]) + "\" y=\"" + num(y) + "\">" + cells[c] + "</text>\n";
        }
        out += "  </g>\n";
    }
    out += "</svg>\n";
    return out;
}

struct GridCell {
    std::string caption;
    const Molecule* molecule = nullptr;
    Layout layout;
    AtomScores scores;
};

/// Several molecules on one page, one nested group per molecule, all colored
/// on the same scale. A color bar at the bottom shows the scale.
inline std::string render_grid(const std::vector<GridCell>& cells, std::size_t columns = 4, double cell = 220.0) {
    using detail::num;
    if (columns == 0) throw InputError("grid needs at least one column");
    for (const auto& c : cells) {
        if (!c.molecule) throw InputError("grid cell without a molecule");
        detail::check_sizes(*c.molecule, c.layout, c.scores);
    }
    const std::size_t rows = (cells.size() + columns - 1) / columns;
    const double bar_h = 40.0;
    const double width = static_cast<double>(std::max<std::size_t>(1, std::min(columns, cells.size()))) * cell;
    const double height = static_cast<double>(rows) * cell + bar_h;
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "  <rect width=\"100%\" height=\"100%\" fill=\"#FFFFFF\"/>\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const double gx = static_cast<double>(i % columns) * cell;
        const double gy = static_cast<double>(i / columns) * cell;
        const auto box = detail::bounds(c.layout);
        const double inner = cell - 50.0;
        const double extent = std::max({box.width(), box.height(), 1e-9});
        const double scale = std::min(30.0, inner / extent);
        const double ox = (cell - box.width() * scale) / 2.0;
        const double oy = (cell - 20.0 - box.height() * scale) / 2.0;
        out += "  <g class=\"molecule\" id=\"molecule-" + std::to_string(i) + "\" transform=\"translate(" + num(gx) +
               "," + num(gy) + ")\">\n";
        detail::draw_molecule(out, *c.molecule, c.layout, c.scores, scale, ox, oy, "    ");
        out += "    <text x=\"" + num(cell / 2.0) + "\" y=\"" + num(cell - 8.0) +
               "\" font-family=\"sans-serif\" font-size=\"12.00\" text-anchor=\"middle\">" +
               detail::xml_escape(c.caption) + "</text>\n";
        out += "  </g>\n";
    }
    out += "  <g class=\"color-scale\" font-family=\"sans-serif\" font-size=\"10.00\">\n";
    const double bx = 20.0, by = static_cast<double>(rows) * cell + 8.0, seg = 16.0;
    for (int k = 0; k <= 20; ++k) {
        const double s = -1.0 + 0.1 * k;
        out += "    <rect x=\"" + num(bx + seg * k) + "\" y=\"" + num(by) + "\" width=\"" + num(seg) +
               "\" height=\"12.00\" fill=\"" + hex_color(score_color(s)) + "\"/>\n";
    }
    out += "    <text x=\"" + num(bx) + "\" y=\"" + num(by + 26) + "\">-1 (lower RON)</text>\n";
    out += "    <text x=\"" + num(bx + seg * 21) + "\" y=\"" + num(by + 26) +
           "\" text-anchor=\"end\">+1 (higher RON)</text>\n";
    out += "  </g>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace ronpaint
