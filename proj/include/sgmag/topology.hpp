#pragma once

// Graph approximations of the Sierpinski gasket.
//
// Level-m approximation: vertex set V_m and edge set E_m produced by the
// iterated function system F_j(x) = (x + p_j)/2 on the corner triangle
// {p_0, p_1, p_2}.  All vertex coordinates are dyadic rationals and are kept
// in exact integer arithmetic so that vertices shared between cells (and
// between levels) are identified without tolerance games.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgmag {

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

/// Address of a cell: word over {0,1,2}, outermost letter first.
/// The empty word addresses the whole gasket and serializes as ".".
using CellWord = std::string;

inline std::string word_to_string(const CellWord& w) {
    return w.empty() ? std::string(".") : w;
}

inline CellWord word_from_string(const std::string& s) {
    if (s == ".") return {};
    for (char c : s)
        if (c < '0' || c > '2') fail("invalid cell word '" + s + "'");
    return s;
}

/// Exact dyadic planar point, stored as integers scaled by 2^kScaleBits.
/// The reference triangle is p_0=(0,0), p_1=(1,0), p_2=(1/2,1/2); only the
/// combinatorics matter, so a rational stand-in for the equilateral apex is
/// used throughout.
struct Vec2 {
    static constexpr int kScaleBits = 32;
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
    friend auto operator<=>(const Vec2&, const Vec2&) = default;
};

inline constexpr std::array<Vec2, 3> kCorners = {
    Vec2{0, 0},
    Vec2{std::int64_t(1) << Vec2::kScaleBits, 0},
    Vec2{std::int64_t(1) << (Vec2::kScaleBits - 1),
         std::int64_t(1) << (Vec2::kScaleBits - 1)},
};

inline Vec2 midpoint(const Vec2& a, const Vec2& b) {
    return Vec2{(a.x + b.x) / 2, (a.y + b.y) / 2};
}

/// F_w(p) for the composed contraction F_w = F_{w_1} o ... o F_{w_m}.
inline Vec2 apply_word(const CellWord& w, Vec2 p) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        const Vec2& c = kCorners[static_cast<std::size_t>(*it - '0')];
        p.x = (p.x + c.x) / 2;
        p.y = (p.y + c.y) / 2;
    }
    return p;
}

/// Directed edge in canonical orientation.  The type-j edge of a cell runs
/// from corner j-1 to corner j+1 (indices mod 3), which traverses each cell
/// clockwise and each hole boundary counterclockwise.
struct Edge {
    int tail = 0;       ///< vertex index of F_w(p_{j-1})
    int head = 0;       ///< vertex index of F_w(p_{j+1})
    int cell = 0;       ///< owning cell index
    int type = 0;       ///< j in {0,1,2}
};

/// Immutable level-m graph: vertices, cells, canonically oriented edges and
/// adjacency.  Vertex 0..2 are the boundary corners p_0..p_2; the remaining
/// vertices are sorted by coordinate, so the Dirichlet block is simply the
/// index range [3, n).
class LevelGraph {
public:
    int level = 0;
    std::vector<Vec2> verts;
    std::vector<int> first_level;             ///< level of first appearance
    std::vector<std::array<int, 3>> cells;    ///< corner vertex ids per cell
    std::vector<Edge> edges;                  ///< edge id = 3*cell + type

    struct Link {
        int other;   ///< neighbouring vertex
        int edge;    ///< edge id
        int sign;    ///< +1 if this vertex is the tail, -1 if the head
    };
    std::vector<std::vector<Link>> adj;

    int vertex_count() const { return static_cast<int>(verts.size()); }
    int cell_count() const { return static_cast<int>(cells.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int degree(int v) const { return static_cast<int>(adj[v].size()); }
    bool is_boundary(int v) const { return v < 3; }

    int index_of(const Vec2& p) const {
        auto it = index_.find(p);
        return it == index_.end() ? -1 : it->second;
    }

    CellWord word_of_cell(int c) const {
        CellWord w(static_cast<std::size_t>(level), '0');
        for (int i = level - 1; i >= 0; --i, c /= 3)
            w[static_cast<std::size_t>(i)] = static_cast<char>('0' + c % 3);
        return w;
    }

    int cell_of_word(const CellWord& w) const {
        if (static_cast<int>(w.size()) != level) fail("level mismatch: cell word");
        int c = 0;
        for (char ch : w) c = 3 * c + (ch - '0');
        return c;
    }

    /// Signed lookup of the edge joining u to v: returns (edge id, +1) when
    /// the canonical direction is u->v and (edge id, -1) otherwise.
    std::pair<int, int> find_edge(int u, int v) const {
        for (const Link& l : adj[u])
            if (l.other == v) return {l.edge, l.sign};
        fail("vertices are not adjacent");
    }

    static const LevelGraph& get(int m);

private:
    std::map<Vec2, int> index_;
    static LevelGraph build(int m);
};

inline int pow3(int m) {
    int r = 1;
    while (m-- > 0) r *= 3;
    return r;
}

/// |V_m| = (3^{m+1} + 3)/2.
inline int vertex_count_formula(int m) { return (pow3(m + 1) + 3) / 2; }

inline LevelGraph LevelGraph::build(int m) {
    if (m < 0 || m > 12) fail("level out of supported range");
    LevelGraph g;
    g.level = m;
    const int ncells = pow3(m);

    // Collect corner points of every cell, then fix the vertex order:
    // boundary corners first, everything else sorted by coordinate.
    std::vector<std::array<Vec2, 3>> cell_pts(static_cast<std::size_t>(ncells));
    std::map<Vec2, int> order;
    for (int c = 0; c < ncells; ++c) {
        CellWord w = g.word_of_cell(c);
        // Walk the word once and reuse the prefix map for all three corners.
        for (int j = 0; j < 3; ++j)
            cell_pts[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
                apply_word(w, kCorners[static_cast<std::size_t>(j)]);
        g.cells.push_back({});  // filled below once indices exist
    }
    for (const auto& pts : cell_pts)
        for (const Vec2& p : pts) order.emplace(p, 0);

    g.verts.reserve(order.size());
    for (int j = 0; j < 3; ++j) {
        g.verts.push_back(kCorners[static_cast<std::size_t>(j)]);
        order[kCorners[static_cast<std::size_t>(j)]] = j;
    }
    for (auto& [p, idx] : order) {
        if (p == kCorners[0] || p == kCorners[1] || p == kCorners[2]) continue;
        idx = static_cast<int>(g.verts.size());
        g.verts.push_back(p);
    }
    g.index_ = order;

    // First level of appearance: F_w(p_j) is born at |w| minus the number of
    // trailing letters equal to j (F_j fixes p_j).
    g.first_level.assign(g.verts.size(), m);
    for (int c = 0; c < ncells; ++c) {
        CellWord w = g.word_of_cell(c);
        for (int j = 0; j < 3; ++j) {
            int t = 0;
            while (t < m && w[static_cast<std::size_t>(m - 1 - t)] == '0' + j) ++t;
            int& fl = g.first_level[static_cast<std::size_t>(
                order[cell_pts[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]])];
            fl = std::min(fl, m - t);
        }
    }

    for (int c = 0; c < ncells; ++c)
        for (int j = 0; j < 3; ++j)
            g.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
                order[cell_pts[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]];

    // Edges in the fixed layout edge_id = 3*cell + type.
    g.edges.reserve(static_cast<std::size_t>(3 * ncells));
    g.adj.assign(g.verts.size(), {});
    for (int c = 0; c < ncells; ++c) {
        const auto& cv = g.cells[static_cast<std::size_t>(c)];
        for (int j = 0; j < 3; ++j) {
            Edge e;
            e.tail = cv[static_cast<std::size_t>((j + 2) % 3)];
            e.head = cv[static_cast<std::size_t>((j + 1) % 3)];
            e.cell = c;
            e.type = j;
            int id = static_cast<int>(g.edges.size());
            g.edges.push_back(e);
            g.adj[static_cast<std::size_t>(e.tail)].push_back({e.head, id, +1});
            g.adj[static_cast<std::size_t>(e.head)].push_back({e.tail, id, -1});
        }
    }
    return g;
}

inline const LevelGraph& LevelGraph::get(int m) {
    static std::mutex mu;
    static std::vector<std::unique_ptr<LevelGraph>> cache;
    std::scoped_lock lock(mu);
    if (static_cast<std::size_t>(m) >= cache.size())
        cache.resize(static_cast<std::size_t>(m) + 1);
    auto& slot = cache[static_cast<std::size_t>(m)];
    if (!slot) slot = std::make_unique<LevelGraph>(build(m));
    return *slot;
}

/// All hole addresses resolved at level m: words of length < m.
/// Count = (3^m - 1)/2.
inline std::vector<CellWord> holes_at_level(int m) {
    std::vector<CellWord> out;
    std::vector<CellWord> frontier = {CellWord{}};
    for (int len = 0; len < m; ++len) {
        std::vector<CellWord> next;
        for (const auto& w : frontier) {
            out.push_back(w);
            for (char c = '0'; c <= '2'; ++c) next.push_back(w + c);
        }
        frontier = std::move(next);
    }
    return out;
}

/// Counterclockwise cycle of level-m vertices around the central hole of
/// cell h.  The loop starts at the midpoint opposite corner 0 of the cell
/// and visits 3 * 2^{m-|h|-1} vertices.
inline std::vector<int> hole_boundary_loop(const CellWord& h, int m) {
    const int k = static_cast<int>(h.size());
    if (m < k + 1) fail("hole not resolved at this level");
    const LevelGraph& g = LevelGraph::get(m);

    std::array<Vec2, 3> c;
    for (int j = 0; j < 3; ++j)
        c[static_cast<std::size_t>(j)] = apply_word(h, kCorners[static_cast<std::size_t>(j)]);
    // Midpoints of the cell; q_j is opposite corner j.  (q_0,q_1,q_2) is a
    // positively oriented triangle bounding the hole.
    std::array<Vec2, 3> q = {midpoint(c[1], c[2]), midpoint(c[2], c[0]),
                             midpoint(c[0], c[1])};

    std::vector<int> loop;
    const std::int64_t steps = std::int64_t(1) << (m - k - 1);
    for (int s = 0; s < 3; ++s) {
        const Vec2& a = q[static_cast<std::size_t>(s)];
        const Vec2& b = q[static_cast<std::size_t>((s + 1) % 3)];
        for (std::int64_t t = 0; t < steps; ++t) {
            Vec2 p{a.x + (b.x - a.x) / steps * t, a.y + (b.y - a.y) / steps * t};
            int idx = g.index_of(p);
            if (idx < 0) fail("hole boundary vertex missing from graph");
            loop.push_back(idx);
        }
    }
    return loop;
}

namespace detail {

/// Shared corner count of two cells (cells of one level meet in at most one
/// vertex).
inline int shared_vertex(const std::array<int, 3>& a, const std::array<int, 3>& b) {
    for (int x : a)
        for (int y : b)
            if (x == y) return x;
    return -1;
}

}  // namespace detail

namespace detail {

/// Straight chain of m-cells hugging the edge from corner p to corner q:
/// 2^m cells, recursively [p-half then q-half].
inline std::vector<CellWord> straight_chain_words(int m, int p, int q) {
    if (m == 0) return {CellWord{}};
    std::vector<CellWord> out;
    for (int half : {p, q})
        for (const CellWord& w : straight_chain_words(m - 1, p, q))
            out.push_back(static_cast<char>('0' + half) + w);
    return out;
}

/// Chain of m-cells from corner p to corner q that leaves the straight route
/// only to pass around the central hole of cell h (so |h| <= m-2), staying
/// straight everywhere else.
inline std::vector<CellWord> detour_chain_words(int m, int p, int q, const CellWord& h) {
    const int r = 3 - p - q;
    auto prefixed = [](int letter, std::vector<CellWord> ws) {
        for (CellWord& w : ws) w.insert(w.begin(), static_cast<char>('0' + letter));
        return ws;
    };
    auto append = [](std::vector<CellWord>& dst, std::vector<CellWord> src) {
        dst.insert(dst.end(), src.begin(), src.end());
    };
    std::vector<CellWord> out;
    if (h.empty()) {
        // Around the central hole: route p -> r -> q with straight segments.
        if (m < 2) fail("detour needs two levels below the hole");
        out = prefixed(p, straight_chain_words(m - 1, p, r));
        append(out, prefixed(r, straight_chain_words(m - 1, p, q)));
        append(out, prefixed(q, straight_chain_words(m - 1, r, q)));
        return out;
    }
    const int j = h.front() - '0';
    const CellWord rest = h.substr(1);
    if (j == p) {
        out = prefixed(p, detour_chain_words(m - 1, p, q, rest));
        append(out, prefixed(q, straight_chain_words(m - 1, p, q)));
    } else if (j == q) {
        out = prefixed(p, straight_chain_words(m - 1, p, q));
        append(out, prefixed(q, detour_chain_words(m - 1, p, q, rest)));
    } else {
        // Detour lives in the opposite corner cell: route p -> r -> q.
        out = prefixed(p, straight_chain_words(m - 1, p, r));
        append(out, prefixed(r, detour_chain_words(m - 1, p, q, rest)));
        append(out, prefixed(q, straight_chain_words(m - 1, r, q)));
    }
    return out;
}

}  // namespace detail

/// The canonical family of simple chains of m-cells joining corner p to
/// corner q (p, q in {0,1,2}, p != q): the straight chain plus, for every
/// hole h with |h| <= m-2, the chain that detours around exactly that hole.
/// Each is a simple chain (consecutive cells meet in exactly one vertex,
/// non-consecutive cells are disjoint); the family has (3^{m-1} + 1)/2
/// members and the eigenfunctions it supports are linearly independent.
inline std::vector<std::vector<int>> simple_chains(int m, int p, int q) {
    if (m < 1) fail("simple_chains requires level >= 1");
    if (p == q || p < 0 || p > 2 || q < 0 || q > 2) fail("corner indices must differ");
    const LevelGraph& g = LevelGraph::get(m);

    std::vector<std::vector<CellWord>> families;
    families.push_back(detail::straight_chain_words(m, p, q));
    for (const CellWord& h : holes_at_level(m - 1))
        families.push_back(detail::detour_chain_words(m, p, q, h));

    std::vector<std::vector<int>> out;
    for (const auto& words : families) {
        std::vector<int> chain;
        for (const CellWord& w : words) chain.push_back(g.cell_of_word(w));
        out.push_back(std::move(chain));
    }
    return out;
}

/// Every sequence of distinct m-cells satisfying the simple-chain conditions
/// between corners p and q.  Exponential in m; only usable for m <= 4.  The
/// curated simple_chains family is a strict subfamily from level 3 on.
inline std::vector<std::vector<int>> all_simple_chains(int m, int p, int q) {
    if (m < 1 || m > 4) fail("exhaustive chain search limited to levels 1..4");
    if (p == q || p < 0 || p > 2 || q < 0 || q > 2) fail("corner indices must differ");
    const LevelGraph& g = LevelGraph::get(m);
    const int ncells = g.cell_count();

    std::vector<std::vector<int>> touch(static_cast<std::size_t>(ncells));
    for (int a = 0; a < ncells; ++a)
        for (int b = a + 1; b < ncells; ++b)
            if (detail::shared_vertex(g.cells[static_cast<std::size_t>(a)],
                                      g.cells[static_cast<std::size_t>(b)]) >= 0) {
                touch[static_cast<std::size_t>(a)].push_back(b);
                touch[static_cast<std::size_t>(b)].push_back(a);
            }
    auto touches = [&](int a, int b) {
        return detail::shared_vertex(g.cells[static_cast<std::size_t>(a)],
                                     g.cells[static_cast<std::size_t>(b)]) >= 0;
    };

    const int start = g.cell_of_word(CellWord(static_cast<std::size_t>(m),
                                              static_cast<char>('0' + p)));
    const int goal = g.cell_of_word(CellWord(static_cast<std::size_t>(m),
                                             static_cast<char>('0' + q)));

    std::vector<std::vector<int>> out;
    std::vector<int> path = {start};
    std::vector<char> used(static_cast<std::size_t>(ncells), 0);
    used[static_cast<std::size_t>(start)] = 1;

    auto dfs = [&](auto&& self, int cur) -> void {
        if (cur == goal) {
            out.push_back(path);
            return;
        }
        for (int nxt : touch[static_cast<std::size_t>(cur)]) {
            if (used[static_cast<std::size_t>(nxt)]) continue;
            bool ok = true;
            // Simplicity: nxt may touch only the current chain end.
            for (std::size_t i = 0; ok && i + 1 < path.size(); ++i)
                if (touches(path[i], nxt)) ok = false;
            if (!ok) continue;
            used[static_cast<std::size_t>(nxt)] = 1;
            path.push_back(nxt);
            self(self, nxt);
            path.pop_back();
            used[static_cast<std::size_t>(nxt)] = 0;
        }
    };
    dfs(dfs, start);

    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace sgmag
