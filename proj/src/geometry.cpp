#include "finverify/geometry.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace fv {

Rect Polygon::bbox() const {
  Rect r{v[0].x, v[0].y, v[0].x, v[0].y};
  for (const auto& p : v) {
    r.x1 = std::min(r.x1, p.x);
    r.y1 = std::min(r.y1, p.y);
    r.x2 = std::max(r.x2, p.x);
    r.y2 = std::max(r.y2, p.y);
  }
  return r;
}

i64 Polygon::area() const {
  i128 s = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    s += (i128)a.x * b.y - (i128)b.x * a.y;
  }
  s /= 2;
  return (i64)s;
}

Polygon rect_poly(const Rect& r) {
  Polygon p;
  p.v = {{r.x1, r.y1}, {r.x2, r.y1}, {r.x2, r.y2}, {r.x1, r.y2}};
  return p;
}

namespace {

// rotate so the lexicographically smallest vertex comes first
void canonical_start(Polygon& p) {
  auto it = std::min_element(p.v.begin(), p.v.end());
  std::rotate(p.v.begin(), it, p.v.end());
}

void drop_collinear(std::vector<Point>& v) {
  std::vector<Point> out;
  size_t n = v.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& prev = v[(i + n - 1) % n];
    const Point& cur = v[i];
    const Point& next = v[(i + 1) % n];
    if (cur == prev) continue;
    bool col = (prev.x == cur.x && cur.x == next.x) ||
               (prev.y == cur.y && cur.y == next.y);
    if (!col) out.push_back(cur);
  }
  v = out;
}

i64 axis_gap(i64 lo1, i64 hi1, i64 lo2, i64 hi2) {
  i64 g = std::max(lo1, lo2) - std::min(hi1, hi2);
  return g > 0 ? g : 0;
}

// exact squared distance between two axis-parallel segments (as degenerate
// boxes); 0 when they touch or cross
i128 seg_dist2(Point a1, Point a2, Point b1, Point b2) {
  i64 ax1 = std::min(a1.x, a2.x), ax2 = std::max(a1.x, a2.x);
  i64 ay1 = std::min(a1.y, a2.y), ay2 = std::max(a1.y, a2.y);
  i64 bx1 = std::min(b1.x, b2.x), bx2 = std::max(b1.x, b2.x);
  i64 by1 = std::min(b1.y, b2.y), by2 = std::max(b1.y, b2.y);
  i64 gx = axis_gap(ax1, ax2, bx1, bx2);
  i64 gy = axis_gap(ay1, ay2, by1, by2);
  return (i128)gx * gx + (i128)gy * gy;
}

// ---- scanline boolean core ----

struct VEdge {
  i64 x, y1, y2;  // y1 < y2
  int da, db;     // coverage delta to the right of x, per operand
};

struct SlabCol {
  i64 x1, x2;
  std::vector<std::pair<i64, i64>> iv;  // disjoint, sorted y-intervals
};

void add_edges(const ShapeList& shapes, bool operand_b, std::vector<VEdge>& out) {
  for (const auto& p : shapes) {
    size_t n = p.v.size();
    for (size_t i = 0; i < n; ++i) {
      Point a = p.v[i], b = p.v[(i + 1) % n];
      if (a.x != b.x || a.y == b.y) continue;
      // CCW: downward vertical edge opens coverage to its right
      int d = (b.y < a.y) ? +1 : -1;
      VEdge e{a.x, std::min(a.y, b.y), std::max(a.y, b.y), 0, 0};
      (operand_b ? e.db : e.da) = d;
      out.push_back(e);
    }
  }
}

template <typename Pred>
std::vector<SlabCol> sweep(std::vector<VEdge> edges, Pred pred) {
  std::vector<SlabCol> cols;
  if (edges.empty()) return cols;
  std::sort(edges.begin(), edges.end(),
            [](const VEdge& a, const VEdge& b) { return a.x < b.x; });
  std::map<i64, std::pair<int, int>> delta;  // y -> (da, db)
  std::vector<std::pair<i64, i64>> cur;
  i64 prev_x = 0;
  size_t i = 0;
  while (i < edges.size()) {
    i64 x = edges[i].x;
    if (!cur.empty()) cols.push_back({prev_x, x, cur});
    for (; i < edges.size() && edges[i].x == x; ++i) {
      auto& d1 = delta[edges[i].y1];
      d1.first += edges[i].da;
      d1.second += edges[i].db;
      auto& d2 = delta[edges[i].y2];
      d2.first -= edges[i].da;
      d2.second -= edges[i].db;
    }
    for (auto it = delta.begin(); it != delta.end();) {
      if (it->second.first == 0 && it->second.second == 0)
        it = delta.erase(it);
      else
        ++it;
    }
    cur.clear();
    int ca = 0, cb = 0;
    bool open = false;
    i64 open_y = 0;
    for (const auto& [y, d] : delta) {
      ca += d.first;
      cb += d.second;
      bool in = pred(ca > 0, cb > 0);
      if (in && !open) {
        open = true;
        open_y = y;
      } else if (!in && open) {
        open = false;
        cur.push_back({open_y, y});
      }
    }
    prev_x = x;
  }
  // merge x-adjacent columns with identical interval structure
  std::vector<SlabCol> merged;
  for (auto& c : cols) {
    if (!merged.empty() && merged.back().x2 == c.x1 && merged.back().iv == c.iv)
      merged.back().x2 = c.x2;
    else
      merged.push_back(std::move(c));
  }
  return merged;
}

std::vector<Rect> cols_to_rects(const std::vector<SlabCol>& cols) {
  std::vector<Rect> out;
  for (const auto& c : cols)
    for (const auto& [y1, y2] : c.iv) out.push_back({c.x1, y1, c.x2, y2});
  return out;
}

// ---- boundary reconstruction ----

struct DirEdge {
  Point a, b;  // directed a -> b, interior on the left
};

int dir_of(const DirEdge& e) {
  // 0:+x 1:+y 2:-x 3:-y
  if (e.b.x > e.a.x) return 0;
  if (e.b.y > e.a.y) return 1;
  if (e.b.x < e.a.x) return 2;
  return 3;
}

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void uni(int a, int b) { p[find(a)] = find(b); }
};

// difference of sorted disjoint interval lists: a \ b
std::vector<std::pair<i64, i64>> iv_diff(const std::vector<std::pair<i64, i64>>& a,
                                         const std::vector<std::pair<i64, i64>>& b) {
  std::vector<std::pair<i64, i64>> out;
  size_t j = 0;
  for (auto [lo, hi] : a) {
    i64 cur = lo;
    while (j < b.size() && b[j].second <= cur) ++j;
    size_t k = j;
    while (k < b.size() && b[k].first < hi) {
      if (b[k].first > cur) out.push_back({cur, b[k].first});
      cur = std::max(cur, b[k].second);
      ++k;
    }
    if (cur < hi) out.push_back({cur, hi});
  }
  return out;
}

ShapeList rebuild(const std::vector<SlabCol>& cols) {
  ShapeList result;
  std::vector<Rect> rects = cols_to_rects(cols);
  if (rects.empty()) return result;
  int n = (int)rects.size();

  // connected components: rects in x-adjacent columns with y-overlap > 0
  Dsu dsu(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (rects[j].x1 > rects[i].x2) break;  // rects sorted by (x1, y1)
      bool xadj = rects[i].x2 == rects[j].x1 || rects[i].x1 == rects[j].x2;
      if (!xadj) continue;
      if (std::min(rects[i].y2, rects[j].y2) > std::max(rects[i].y1, rects[j].y1))
        dsu.uni(i, j);
    }
  // rects are sorted by column (x1) then y1 already; the inner `break` above
  // relies on that ordering
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < n; ++i) comps[dsu.find(i)].push_back(i);

  for (const auto& [root, members] : comps) {
    // vertical boundary edges via per-x interval differences
    std::map<i64, std::pair<std::vector<std::pair<i64, i64>>,
                            std::vector<std::pair<i64, i64>>>> at_x;  // L, R
    for (int idx : members) {
      const Rect& r = rects[idx];
      at_x[r.x2].first.push_back({r.y1, r.y2});
      at_x[r.x1].second.push_back({r.y1, r.y2});
    }
    std::vector<DirEdge> edges;
    for (auto& [x, lr] : at_x) {
      auto& [L, R] = lr;
      std::sort(L.begin(), L.end());
      std::sort(R.begin(), R.end());
      for (auto [lo, hi] : iv_diff(R, L)) edges.push_back({{x, hi}, {x, lo}});  // left bound, -y
      for (auto [lo, hi] : iv_diff(L, R)) edges.push_back({{x, lo}, {x, hi}});  // right bound, +y
    }
    for (int idx : members) {
      const Rect& r = rects[idx];
      edges.push_back({{r.x1, r.y1}, {r.x2, r.y1}});  // bottom, +x
      edges.push_back({{r.x2, r.y2}, {r.x1, r.y2}});  // top, -x
    }

    std::sort(edges.begin(), edges.end(), [](const DirEdge& a, const DirEdge& b) {
      if (a.a != b.a) return a.a < b.a;
      return a.b < b.b;
    });
    std::map<Point, std::vector<int>> by_start;
    for (int i = 0; i < (int)edges.size(); ++i) by_start[edges[i].a].push_back(i);
    std::vector<bool> used(edges.size(), false);

    std::vector<Polygon> contours;
    bool has_hole = false;
    for (int s = 0; s < (int)edges.size(); ++s) {
      if (used[s]) continue;
      std::vector<Point> verts;
      int cur = s;
      int prev_dir = -1;
      while (!used[cur]) {
        used[cur] = true;
        int d = dir_of(edges[cur]);
        if (d != prev_dir) verts.push_back(edges[cur].a);
        prev_dir = d;
        const Point& end = edges[cur].b;
        auto it = by_start.find(end);
        if (it == by_start.end()) throw error("geometry: open contour during rebuild");
        int next = -1;
        // prefer the sharpest left turn so corner-touching regions stay apart
        int want[3] = {(d + 1) % 4, d, (d + 3) % 4};
        for (int w : want) {
          for (int cand : it->second)
            if (!used[cand] && dir_of(edges[cand]) == w) { next = cand; break; }
          if (next >= 0) break;
        }
        if (next < 0) break;  // loop closed
        cur = next;
      }
      Polygon poly;
      poly.v = verts;
      drop_collinear(poly.v);
      if (poly.v.size() < 4) throw error("geometry: degenerate contour");
      if (poly.area() < 0)
        has_hole = true;
      else {
        canonical_start(poly);
        contours.push_back(std::move(poly));
      }
    }
    if (has_hole || contours.size() != 1) {
      // component encloses a hole: fall back to its rectangle decomposition
      for (int idx : members) result.push_back(rect_poly(rects[idx]));
    } else {
      result.push_back(std::move(contours[0]));
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

template <typename Pred>
ShapeList run_bool(const ShapeList& a, const ShapeList& b, Pred pred) {
  std::vector<VEdge> edges;
  add_edges(a, false, edges);
  add_edges(b, true, edges);
  return rebuild(sweep(std::move(edges), pred));
}

}  // namespace

Polygon validate_polygon(const std::vector<Point>& pts, const std::string& what) {
  Polygon p;
  p.v = pts;
  drop_collinear(p.v);
  if (p.v.size() < 4) throw error(what + ": polygon needs >= 4 vertices");
  size_t n = p.v.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = p.v[i];
    const Point& b = p.v[(i + 1) % n];
    if (a.x != b.x && a.y != b.y)
      throw error(what + strf(": edge (%lld,%lld)-(%lld,%lld) is not axis-parallel",
                              (long long)a.x, (long long)a.y, (long long)b.x,
                              (long long)b.y));
  }
  if (p.area() < 0) std::reverse(p.v.begin(), p.v.end());
  if (p.area() <= 0) throw error(what + ": zero-area polygon");
  // simplicity: non-adjacent edges must not touch
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (seg_dist2(p.v[i], p.v[(i + 1) % n], p.v[j], p.v[(j + 1) % n]) == 0)
        throw error(what + ": self-intersecting polygon");
    }
  canonical_start(p);
  return p;
}

ShapeList normalize(const ShapeList& in) {
  std::vector<VEdge> edges;
  add_edges(in, false, edges);
  return rebuild(sweep(std::move(edges), [](bool a, bool) { return a; }));
}

ShapeList geo_union(const ShapeList& a, const ShapeList& b) {
  return run_bool(a, b, [](bool x, bool y) { return x || y; });
}

ShapeList geo_intersect(const ShapeList& a, const ShapeList& b) {
  return run_bool(a, b, [](bool x, bool y) { return x && y; });
}

ShapeList geo_subtract(const ShapeList& a, const ShapeList& b) {
  return run_bool(a, b, [](bool x, bool y) { return x && !y; });
}

std::vector<Rect> decompose(const ShapeList& in) {
  std::vector<VEdge> edges;
  add_edges(in, false, edges);
  return cols_to_rects(sweep(std::move(edges), [](bool a, bool) { return a; }));
}

i64 area(const ShapeList& in) {
  i64 total = 0;
  for (const auto& r : decompose(in)) total += r.area();
  return total;
}

ShapeList dilate(const ShapeList& in, i64 v) {
  if (v < 0) throw error("dilate: negative amount");
  if (v == 0) return normalize(in);
  ShapeList grown;
  for (const auto& r : decompose(in))
    grown.push_back(rect_poly({r.x1 - v, r.y1 - v, r.x2 + v, r.y2 + v}));
  return normalize(grown);
}

bool contains(const Polygon& p, Point pt) {
  for (const auto& r : decompose({p}))
    if (pt.x >= r.x1 && pt.x <= r.x2 && pt.y >= r.y1 && pt.y <= r.y2) return true;
  return false;
}

bool touches(const Polygon& a, const Polygon& b) {
  Rect ba = a.bbox(), bb = b.bbox();
  if (axis_gap(ba.x1, ba.x2, bb.x1, bb.x2) > 0 ||
      axis_gap(ba.y1, ba.y2, bb.y1, bb.y2) > 0)
    return false;
  if (area(geo_intersect({a}, {b})) > 0) return true;
  // overlap-free: look for a shared boundary run of positive length
  size_t na = a.v.size(), nb = b.v.size();
  for (size_t i = 0; i < na; ++i) {
    Point a1 = a.v[i], a2 = a.v[(i + 1) % na];
    for (size_t j = 0; j < nb; ++j) {
      Point b1 = b.v[j], b2 = b.v[(j + 1) % nb];
      bool va = a1.x == a2.x, vb = b1.x == b2.x;
      if (va != vb) continue;
      if (va) {
        if (a1.x != b1.x) continue;
        i64 lo = std::max(std::min(a1.y, a2.y), std::min(b1.y, b2.y));
        i64 hi = std::min(std::max(a1.y, a2.y), std::max(b1.y, b2.y));
        if (hi > lo) return true;
      } else {
        if (a1.y != b1.y) continue;
        i64 lo = std::max(std::min(a1.x, a2.x), std::min(b1.x, b2.x));
        i64 hi = std::min(std::max(a1.x, a2.x), std::max(b1.x, b2.x));
        if (hi > lo) return true;
      }
    }
  }
  return false;
}

i64 min_separation(const Polygon& a, const Polygon& b) {
  if (area(geo_intersect({a}, {b})) > 0) return 0;
  i128 best = -1;
  size_t na = a.v.size(), nb = b.v.size();
  for (size_t i = 0; i < na; ++i)
    for (size_t j = 0; j < nb; ++j) {
      i128 d2 = seg_dist2(a.v[i], a.v[(i + 1) % na], b.v[j], b.v[(j + 1) % nb]);
      if (best < 0 || d2 < best) best = d2;
    }
  return isqrt_floor(best);
}

i64 min_separation(const ShapeList& a, const ShapeList& b) {
  if (a.empty() || b.empty()) throw error("min_separation: empty shape set");
  i64 best = -1;
  for (const auto& pa : a)
    for (const auto& pb : b) {
      Rect ra = pa.bbox(), rb = pb.bbox();
      i64 gx = axis_gap(ra.x1, ra.x2, rb.x1, rb.x2);
      i64 gy = axis_gap(ra.y1, ra.y2, rb.y1, rb.y2);
      i128 lb2 = (i128)gx * gx + (i128)gy * gy;
      if (best >= 0 && lb2 > (i128)best * best) continue;
      i64 d = min_separation(pa, pb);
      if (best < 0 || d < best) best = d;
      if (best == 0) return 0;
    }
  return best;
}

i64 interior_min_width(const Polygon& p) {
  // edge list with interior side (CCW walk: interior on the left)
  struct BEdge {
    bool vertical;
    i64 c;        // x for vertical, y for horizontal
    i64 lo, hi;   // projection extent
    int side;     // +1: interior toward +axis, -1: toward -axis
  };
  std::vector<BEdge> edges;
  size_t n = p.v.size();
  for (size_t i = 0; i < n; ++i) {
    Point a = p.v[i], b = p.v[(i + 1) % n];
    if (a.x == b.x) {
      // heading -y: interior +x; heading +y: interior -x
      int side = (b.y < a.y) ? +1 : -1;
      edges.push_back({true, a.x, std::min(a.y, b.y), std::max(a.y, b.y), side});
    } else {
      // heading +x: interior +y; heading -x: interior -y
      int side = (b.x > a.x) ? +1 : -1;
      edges.push_back({false, a.y, std::min(a.x, b.x), std::max(a.x, b.x), side});
    }
  }
  i64 best = -1;
  for (size_t i = 0; i < edges.size(); ++i)
    for (size_t j = i + 1; j < edges.size(); ++j) {
      const BEdge& e = edges[i];
      const BEdge& f = edges[j];
      if (e.vertical != f.vertical || e.c == f.c) continue;
      if (std::min(e.hi, f.hi) <= std::max(e.lo, f.lo)) continue;  // projections
      const BEdge& lo = e.c < f.c ? e : f;
      const BEdge& hi = e.c < f.c ? f : e;
      if (lo.side != +1 || hi.side != -1) continue;  // interiors must face
      i64 w = hi.c - lo.c;
      if (best < 0 || w < best) best = w;
    }
  if (best < 0) throw error("interior_min_width: no opposing edges");
  return best;
}

}  // namespace fv
