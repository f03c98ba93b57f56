#include "finverify/svg.hpp"

#include <algorithm>
#include <map>

namespace fv {

namespace {

// stable palette; layers pick colors by stack-draw order so the same tech
// always renders the same way
const char* kPalette[] = {
    "#7f8c8d", "#27ae60", "#c0392b", "#e74c3c", "#d35400", "#8e44ad", "#2980b9",
    "#16a085", "#f39c12", "#2c3e50", "#1abc9c", "#9b59b6", "#34495e", "#e67e22",
    "#3498db", "#95a5a6", "#f1c40f", "#806040", "#608040", "#406080",
};

int class_rank(layer_class c) {
  switch (c) {
    case layer_class::active: return 0;
    case layer_class::gate: return 1;
    case layer_class::gate_cut: return 2;
    case layer_class::mol: return 3;
    case layer_class::metal: return 4;
    case layer_class::via: return 5;
  }
  return 6;
}

}  // namespace

std::string svg_string(const flat_layout& layout, const std::vector<violation>& violations,
                       const tech_db& tech) {
  // draw order: substrate up, then vias, colored variants after their base
  std::vector<const layer_def*> order;
  for (const layer_def& l : tech.layers()) order.push_back(&l);
  std::sort(order.begin(), order.end(), [](const layer_def* a, const layer_def* b) {
    auto ka = std::make_tuple(class_rank(a->cls), a->level, a->height, a->name);
    auto kb = std::make_tuple(class_rank(b->cls), b->level, b->height, b->name);
    return ka < kb;
  });
  std::map<std::string, const char*> color;
  int ci = 0;
  const int n_colors = (int)(sizeof(kPalette) / sizeof(kPalette[0]));
  for (const layer_def* l : order) color[l->name] = kPalette[ci++ % n_colors];

  Rect box = layout.bbox();
  const i64 margin = 20;
  i64 x0 = box.x1 - margin, y0 = box.y1 - margin;
  i64 w = (box.x2 - box.x1) + 2 * margin, h = (box.y2 - box.y1) + 2 * margin;
  if (w <= 2 * margin) w = 2 * margin + 1;
  if (h <= 2 * margin) h = 2 * margin + 1;
  auto fy = [&](i64 y) { return y0 + h - (y - y0); };  // layout y up, svg y down

  std::string s;
  s += strf("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%lld %lld %lld %lld\">\n",
            (long long)x0, (long long)y0, (long long)w, (long long)h);
  s += strf("<rect x=\"%lld\" y=\"%lld\" width=\"%lld\" height=\"%lld\" fill=\"#fdfdfa\"/>\n",
            (long long)x0, (long long)y0, (long long)w, (long long)h);
  for (const layer_def* l : order) {
    auto it = layout.layers.find(l->name);
    if (it == layout.layers.end() || it->second.empty()) continue;
    s += strf("<g id=\"layer_%s\" fill=\"%s\" fill-opacity=\"0.45\" stroke=\"%s\" "
              "stroke-width=\"0.5\">\n",
              l->name.c_str(), color[l->name], color[l->name]);
    for (const Polygon& p : it->second) {
      s += "<path d=\"";
      for (size_t i = 0; i < p.v.size(); ++i)
        s += strf("%c%lld %lld", i == 0 ? 'M' : 'L', (long long)p.v[i].x,
                  (long long)fy(p.v[i].y));
      s += "Z\"><title>";
      s += l->name;
      s += "</title></path>\n";
    }
    s += "</g>\n";
  }
  if (!violations.empty()) {
    s += "<g id=\"violations\" fill=\"none\" stroke=\"#ff0022\" stroke-width=\"2\">\n";
    for (const violation& v : violations) {
      const Rect& r = v.location;
      s += strf("<rect x=\"%lld\" y=\"%lld\" width=\"%lld\" height=\"%lld\">",
                (long long)(r.x1 - 2), (long long)(fy(r.y2) - 2), (long long)(r.w() + 4),
                (long long)(r.h() + 4));
      s += "<title>" + v.rule_id + ": " + v.message + "</title></rect>\n";
    }
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

void render_svg(const flat_layout& layout, const std::vector<violation>& violations,
                const tech_db& tech, const std::string& path) {
  atomic_write(path, svg_string(layout, violations, tech));
}

}  // namespace fv
