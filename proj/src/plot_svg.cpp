// Copyright 2026 The heraldsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "heraldsim/error.hpp"
#include "heraldsim/plot.hpp"

namespace heraldsim {

namespace {

constexpr std::array<const char *, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(const char *pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string px(double v) { return fmt("%.2f", v); }

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) return "0";
    return fmt("%.4g", v);
}

std::string escape(const std::string &s) {
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

std::string dash_for(const std::string &style) {
    if (style.rfind("click", 0) == 0) return "6,4";
    if (style.rfind("ppnr", 0) == 0) return "1.5,3";
    if (style.rfind("pnr", 0) == 0) return "8,3,1.5,3";
    return "";
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;
    double p0 = 0.0;  // pixel at lo
    double p1 = 1.0;  // pixel at hi

    double map(double v) const {
        const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                             : (v - lo) / (hi - lo);
        return p0 + t * (p1 - p0);
    }
    bool contains(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            const int a = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
            const int b = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
            for (int k = a; k <= b; ++k) out.push_back(std::pow(10.0, k));
            if (out.size() < 2) {
                out.clear();
                for (int k = a - 1; k <= b + 1; ++k) {
                    for (double m : {1.0, 2.0, 5.0}) {
                        const double v = m * std::pow(10.0, k);
                        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
                    }
                }
            }
            return out;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + step * 1e-9; v += step) {
            out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
        }
        return out;
    }
};

Axis fit_axis(const std::vector<double> &values, bool log, bool include_zero) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(lo <= hi)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    if (log) {
        if (hi / lo < 1.0 + 1e-9) {
            lo /= 2.0;
            hi *= 2.0;
        }
        const double pad = std::pow(hi / lo, 0.04);
        a.lo = lo / pad;
        a.hi = hi * pad;
        return a;
    }
    if (include_zero) {
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    a.lo = (include_zero && lo == 0.0) ? 0.0 : lo - pad;
    a.hi = hi + pad;
    return a;
}

std::array<int, 3> viridis(double t) {
    static constexpr std::array<std::array<int, 3>, 5> stops = {
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    std::array<int, 3> c{};
    for (int k = 0; k < 3; ++k) {
        c[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
    }
    return c;
}

std::string rgb(const std::array<int, 3> &c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

struct Series {
    std::string label;
    std::string dash;
    std::vector<std::size_t> rows;
};

class Canvas {
  public:
    Canvas(int width, int height) : width_(width), height_(height) {
        out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
                " " + std::to_string(height) +
                "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n";
        out_ += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
                std::to_string(height) + "\" fill=\"white\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string &stroke, double w = 1.0,
              const std::string &dash = "") {
        out_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) +
                "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt("%.2g", w) + "\"" +
                (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>> &pts, const std::string &stroke,
                  const std::string &dash, double w = 1.6) {
        if (pts.size() < 2) return;
        out_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt("%.2g", w) + "\"";
        if (!dash.empty()) out_ += " stroke-dasharray=\"" + dash + "\"";
        out_ += " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out_ += (i ? " " : "") + px(pts[i].first) + "," + px(pts[i].second);
        }
        out_ += "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string &fill) {
        out_ += "<circle cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"" + px(r) + "\" fill=\"" + fill + "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string &fill,
              const std::string &extra = "") {
        out_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(std::max(w, 0.0)) +
                "\" height=\"" + px(std::max(h, 0.0)) + "\" fill=\"" + fill + "\"" + extra + "/>\n";
    }
    void text(double x, double y, const std::string &s, const std::string &anchor = "middle",
              const std::string &extra = "") {
        out_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" +
                escape(s) + "</text>\n";
    }
    void raw(const std::string &s) { out_ += s; }
    std::string finish() {
        out_ += "</svg>\n";
        return std::move(out_);
    }
    int width() const { return width_; }
    int height() const { return height_; }

  private:
    int width_;
    int height_;
    std::string out_;
};

struct Frame {
    double left, right, top, bottom;  // pixel bounds of the plot area
};

void draw_x_axis(Canvas &c, const Frame &f, const Axis &x, const std::string &label) {
    c.line(f.left, f.bottom, f.right, f.bottom, "black");
    for (double t : x.ticks()) {
        const double p = x.map(t);
        c.line(p, f.bottom, p, f.bottom + 5, "black");
        c.text(p, f.bottom + 18, tick_label(t));
    }
    c.text((f.left + f.right) / 2, f.bottom + 40, label);
}

void draw_y_axis(Canvas &c, const Frame &f, const Axis &y, const std::string &label, bool right,
                 const std::string &colour = "black") {
    const double xa = right ? f.right : f.left;
    c.line(xa, f.top, xa, f.bottom, colour);
    for (double t : y.ticks()) {
        const double p = y.map(t);
        c.line(xa, p, xa + (right ? 5 : -5), p, colour);
        c.text(xa + (right ? 8 : -8), p + 4, tick_label(t), right ? "start" : "end",
               colour == "black" ? "" : " fill=\"" + colour + "\"");
        if (!right) c.line(f.left, p, f.right, p, "#e6e6e6", 0.8);
    }
    const double xl = right ? f.right + 58 : f.left - 55;
    const double yl = (f.top + f.bottom) / 2;
    c.text(xl, yl, label, "middle",
           " transform=\"rotate(-90 " + px(xl) + " " + px(yl) + ")\"" +
               (colour == "black" ? std::string() : " fill=\"" + colour + "\""));
}

struct LegendEntry {
    std::string label;
    std::string colour;
    std::string dash;
    bool marker = false;
    bool line = true;
};

void draw_legend(Canvas &c, const Frame &f, const std::vector<LegendEntry> &entries, LegendCorner corner) {
    if (entries.empty()) return;
    const double row = 16;
    std::size_t longest = 0;
    for (const auto &e : entries) longest = std::max(longest, e.label.size());
    const double w = 40 + 6.5 * static_cast<double>(longest);
    const double h = row * static_cast<double>(entries.size()) + 8;
    const bool left = corner == LegendCorner::kTopLeft || corner == LegendCorner::kBottomLeft;
    const bool bottom = corner == LegendCorner::kBottomLeft || corner == LegendCorner::kBottomRight;
    const double x0 = left ? f.left + 6 : f.right - w - 6;
    const double y0 = bottom ? f.bottom - h - 6 : f.top + 6;
    c.rect(x0, y0, w, h, "white", " fill-opacity=\"0.85\" stroke=\"#999999\" stroke-width=\"0.6\"");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double y = y0 + 12 + row * static_cast<double>(i);
        if (entries[i].line) c.line(x0 + 6, y, x0 + 30, y, entries[i].colour, 1.6, entries[i].dash);
        if (entries[i].marker) c.circle(x0 + 18, y, 3, entries[i].colour);
        c.text(x0 + 36, y + 4, entries[i].label, "start");
    }
}

std::vector<Series> split_series(const DataTable &data, const PlotSpec &spec) {
    std::vector<std::size_t> cols;
    for (const auto &s : spec.series) cols.push_back(data.column(s));
    const std::optional<std::size_t> style =
        spec.style_by ? std::optional<std::size_t>(data.column(*spec.style_by)) : std::nullopt;
    std::vector<Series> out;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < data.size(); ++r) {
        std::string key;
        std::string label;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::string v = data.text(r, cols[k]);
            key += v + '\x1f';
            const bool numeric = std::holds_alternative<double>(data.rows[r][cols[k]]) ||
                                 std::holds_alternative<std::int64_t>(data.rows[r][cols[k]]);
            label += (k ? ", " : "") + (numeric ? spec.series[k] + "=" + v : v);
        }
        auto [it, fresh] = index.emplace(key, out.size());
        if (fresh) {
            out.push_back({label, style ? dash_for(data.text(r, *style)) : "", {}});
        }
        out[it->second].rows.push_back(r);
    }
    return out;
}

std::vector<double> column_values(const DataTable &data, std::size_t col) {
    std::vector<double> v;
    v.reserve(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) v.push_back(data.number(r, col));
    return v;
}

void check_schema(const DataTable &data, const PlotSpec &spec) {
    if (spec.schema.empty() || data.schema.empty()) return;
    const auto base = [](const std::string &s) { return s.substr(0, s.find('/')); };
    if (base(spec.schema) != base(data.schema)) {
        throw ConfigError("schema mismatch: plot expects " + spec.schema + " but dataset is " + data.schema);
    }
}

void no_data(Canvas &c, const Frame &f) {
    c.text((f.left + f.right) / 2, (f.top + f.bottom) / 2, "no data", "middle",
           " font-size=\"18\" fill=\"#888888\"");
}

std::string heatmap(const DataTable &data, const PlotSpec &spec) {
    const std::size_t xc = data.column(spec.x);
    const std::size_t yc = data.column(spec.y);
    const std::size_t zc = data.column(*spec.z);
    Canvas c(spec.width, spec.height);
    const Frame f{80.0, spec.width - 110.0, 40.0, spec.height - 60.0};
    c.text(spec.width / 2.0, 22, spec.title, "middle", " font-size=\"15\"");
    std::set<double> xs;
    std::set<double> ys;
    for (std::size_t r = 0; r < data.size(); ++r) {
        xs.insert(data.number(r, xc));
        ys.insert(data.number(r, yc));
    }
    c.line(f.left, f.bottom, f.right, f.bottom, "black");
    c.line(f.left, f.top, f.left, f.bottom, "black");
    c.text((f.left + f.right) / 2, f.bottom + 40, spec.x_label.empty() ? spec.x : spec.x_label);
    const double yl = (f.top + f.bottom) / 2;
    c.text(f.left - 60, yl, spec.y_label.empty() ? spec.y : spec.y_label, "middle",
           " transform=\"rotate(-90 " + px(f.left - 60) + " " + px(yl) + ")\"");
    if (data.empty()) {
        no_data(c, f);
        return c.finish();
    }
    const std::vector<double> xv(xs.begin(), xs.end());
    const std::vector<double> yv(ys.begin(), ys.end());
    const double cw = (f.right - f.left) / static_cast<double>(xv.size());
    const double ch = (f.bottom - f.top) / static_cast<double>(yv.size());
    const auto scale = [&](double z) { return spec.log_z ? std::log10(z) : z; };
    double zlo = std::numeric_limits<double>::infinity();
    double zhi = -zlo;
    bool divergent = false;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double z = data.number(r, zc);
        if (!std::isfinite(z) || (spec.log_z && z <= 0)) {
            divergent = divergent || std::isinf(z);
            continue;
        }
        zlo = std::min(zlo, scale(z));
        zhi = std::max(zhi, scale(z));
    }
    if (!(zlo < zhi)) {
        zhi = zlo + 1.0;
    }
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto ix = std::lower_bound(xv.begin(), xv.end(), data.number(r, xc)) - xv.begin();
        const auto iy = std::lower_bound(yv.begin(), yv.end(), data.number(r, yc)) - yv.begin();
        const double z = data.number(r, zc);
        const bool ok = std::isfinite(z) && (!spec.log_z || z > 0);
        c.rect(f.left + cw * static_cast<double>(ix), f.bottom - ch * static_cast<double>(iy + 1), cw + 0.3,
               ch + 0.3, ok ? rgb(viridis((scale(z) - zlo) / (zhi - zlo))) : "#bdbdbd");
    }
    const auto stride = [](std::size_t n) { return std::max<std::size_t>(1, (n + 7) / 8); };
    for (std::size_t i = 0; i < xv.size(); i += stride(xv.size())) {
        const double p = f.left + cw * (static_cast<double>(i) + 0.5);
        c.line(p, f.bottom, p, f.bottom + 5, "black");
        c.text(p, f.bottom + 18, tick_label(xv[i]));
    }
    for (std::size_t i = 0; i < yv.size(); i += stride(yv.size())) {
        const double p = f.bottom - ch * (static_cast<double>(i) + 0.5);
        c.line(f.left - 5, p, f.left, p, "black");
        c.text(f.left - 8, p + 4, tick_label(yv[i]), "end");
    }
    // Colour bar.
    const double bx = f.right + 20;
    const int steps = 64;
    const double bh = (f.bottom - f.top - (divergent ? 30 : 0)) / steps;
    for (int i = 0; i < steps; ++i) {
        c.rect(bx, f.bottom - bh * (i + 1), 16, bh + 0.3, rgb(viridis((i + 0.5) / steps)));
    }
    const auto unscale = [&](double s) { return spec.log_z ? std::pow(10.0, s) : s; };
    c.text(bx + 20, f.bottom, tick_label(unscale(zlo)), "start");
    c.text(bx + 20, f.bottom - bh * steps + 10, tick_label(unscale(zhi)), "start");
    c.text(bx + 8, f.top - 8, spec.z_label.empty() ? *spec.z : spec.z_label);
    if (divergent) {
        c.rect(bx, f.top, 16, 16, "#bdbdbd");
        c.text(bx + 20, f.top + 12, "inf", "start");
    }
    return c.finish();
}

}  // namespace

std::string emit_plot(const DataTable &data, const PlotSpec &spec) {
    check_schema(data, spec);
    if (spec.kind == PlotKind::kHeatmap) {
        if (!spec.z) throw ConfigError("heatmap plot needs a z column");
        return heatmap(data, spec);
    }
    const std::size_t xc = data.column(spec.x);
    const std::size_t yc = data.column(spec.y);
    const auto opt_col = [&](const std::optional<std::string> &name) {
        return name ? std::optional<std::size_t>(data.column(*name)) : std::nullopt;
    };
    const auto ec = opt_col(spec.y_error);
    const auto oc = opt_col(spec.y_overlay);
    const auto y2c = opt_col(spec.y2);
    const auto series = split_series(data, spec);

    Canvas c(spec.width, spec.height);
    const Frame f{80.0, spec.width - (y2c ? 80.0 : 24.0), 40.0, spec.height - 60.0};
    c.text(spec.width / 2.0, 22, spec.title, "middle", " font-size=\"15\"");

    const std::vector<double> xs = column_values(data, xc);
    std::vector<double> ys = column_values(data, yc);
    if (ec) {
        for (std::size_t r = 0; r < data.size(); ++r) {
            const double e = data.number(r, *ec);
            ys.push_back(ys[r] + e);
            ys.push_back(ys[r] - e);
        }
    }
    if (oc) {
        const auto ov = column_values(data, *oc);
        ys.insert(ys.end(), ov.begin(), ov.end());
    }
    Axis x = fit_axis(xs, spec.log_x, false);
    Axis y = fit_axis(ys, spec.log_y, spec.kind == PlotKind::kHistogram);
    x.p0 = f.left;
    x.p1 = f.right;
    y.p0 = f.bottom;
    y.p1 = f.top;
    Axis y2;
    if (y2c) {
        y2 = fit_axis(column_values(data, *y2c), false, false);
        y2.p0 = f.bottom;
        y2.p1 = f.top;
    }
    draw_y_axis(c, f, y, spec.y_label.empty() ? spec.y : spec.y_label, false,
                y2c ? kPalette[0] : "black");
    draw_x_axis(c, f, x, spec.x_label.empty() ? spec.x : spec.x_label);
    if (y2c) draw_y_axis(c, f, y2, spec.y2_label.empty() ? *spec.y2 : spec.y2_label, true, kPalette[1]);
    if (data.empty()) {
        no_data(c, f);
        return c.finish();
    }

    std::vector<LegendEntry> legend;
    const auto ok = [&](std::size_t r) { return x.contains(xs[r]) && y.contains(data.number(r, yc)); };
    for (std::size_t s = 0; s < series.size(); ++s) {
        const std::string colour = kPalette[s % kPalette.size()];
        const auto &rows = series[s].rows;
        switch (spec.kind) {
            case PlotKind::kLines: {
                std::vector<std::pair<double, double>> pts;
                for (std::size_t r : rows) {
                    if (ok(r)) pts.emplace_back(x.map(xs[r]), y.map(data.number(r, yc)));
                }
                c.polyline(pts, colour, series[s].dash);
                legend.push_back({series[s].label, colour, series[s].dash, false, true});
                break;
            }
            case PlotKind::kPoints: {
                for (std::size_t r : rows) {
                    if (!ok(r)) continue;
                    const double cx = x.map(xs[r]);
                    const double v = data.number(r, yc);
                    if (ec) {
                        const double e = data.number(r, *ec);
                        if (std::isfinite(e) && e > 0) {
                            const double lo = spec.log_y && v - e <= 0 ? y.lo : v - e;
                            c.line(cx, y.map(lo), cx, y.map(v + e), colour);
                            c.line(cx - 3, y.map(v + e), cx + 3, y.map(v + e), colour);
                            c.line(cx - 3, y.map(lo), cx + 3, y.map(lo), colour);
                        }
                    }
                    c.circle(cx, y.map(v), 3, colour);
                }
                legend.push_back({series[s].label.empty() ? (spec.y_label.empty() ? spec.y : spec.y_label)
                                                          : series[s].label,
                                  colour, "", true, false});
                break;
            }
            case PlotKind::kHistogram: {
                std::vector<double> sorted;
                for (std::size_t r : rows) sorted.push_back(xs[r]);
                std::sort(sorted.begin(), sorted.end());
                double width = 1.0;
                for (std::size_t i = 1; i < sorted.size(); ++i) {
                    const double d = sorted[i] - sorted[i - 1];
                    if (d > 0 && (i == 1 || d < width)) width = d;
                }
                for (std::size_t r : rows) {
                    if (!ok(r)) continue;
                    const double a = x.map(xs[r] - width / 2);
                    const double b = x.map(xs[r] + width / 2);
                    const double top = y.map(data.number(r, yc));
                    c.rect(a, top, b - a, y.map(std::max(y.lo, 0.0)) - top, "#9ecae1",
                           " stroke=\"#6baed6\" stroke-width=\"0.3\"");
                }
                legend.push_back({series[s].label.empty() ? (spec.y_label.empty() ? spec.y : spec.y_label)
                                                          : series[s].label,
                                  "#9ecae1", "", false, true});
                break;
            }
            case PlotKind::kHeatmap: break;
        }
        if (oc) {
            std::vector<std::pair<double, double>> pts;
            std::vector<std::size_t> order(rows);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
            for (std::size_t r : order) {
                const double v = data.number(r, *oc);
                if (x.contains(xs[r]) && y.contains(v)) pts.emplace_back(x.map(xs[r]), y.map(v));
            }
            const std::string oc_colour = spec.kind == PlotKind::kHistogram ? "#d62728" : colour;
            c.polyline(pts, oc_colour, spec.kind == PlotKind::kHistogram ? "" : "4,3", 1.4);
            if (spec.kind == PlotKind::kHistogram || s == 0) {
                legend.push_back({*spec.y_overlay, oc_colour, spec.kind == PlotKind::kHistogram ? "" : "4,3",
                                  false, true});
            }
        }
    }
    if (y2c) {
        std::vector<std::pair<double, double>> pts;
        std::vector<std::size_t> order(data.size());
        for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
        for (std::size_t r : order) {
            const double v = data.number(r, *y2c);
            if (x.contains(xs[r]) && std::isfinite(v)) pts.emplace_back(x.map(xs[r]), y2.map(v));
        }
        c.polyline(pts, kPalette[1], "", 1.6);
        for (const auto &p : pts) c.rect(p.first - 2.5, p.second - 2.5, 5, 5, kPalette[1]);
        if (legend.size() == 1) legend.front().label = spec.y_label.empty() ? spec.y : spec.y_label;
        legend.push_back({spec.y2_label.empty() ? *spec.y2 : spec.y2_label, kPalette[1], "", false, true});
    }
    draw_legend(c, f, legend, spec.legend);
    return c.finish();
}

PlotSpec plot_preset(std::string_view name) {
    PlotSpec s;
    if (name == "fig3a_curves") {
        s.kind = PlotKind::kLines;
        s.title = "Heralded g2 versus herald probability";
        s.schema = "heraldsim.fig3a_curves/1";
        s.x = "herald_probability";
        s.y = "g2";
        s.x_label = "herald probability per pulse";
        s.y_label = "g2(0)";
        s.series = {"detector", "eta_h"};
        s.style_by = "detector";
        s.log_x = true;
        s.legend = LegendCorner::kTopLeft;
    } else if (name == "fig3a_points") {
        s.kind = PlotKind::kPoints;
        s.title = "Monte Carlo g2 against the analytic model";
        s.schema = "heraldsim.fig3a_points/1";
        s.x = "herald_rate";
        s.y = "g2";
        s.x_label = "herald rate per pulse";
        s.y_label = "g2(0)";
        s.series = {"detector", "mode", "eta_h"};
        s.y_error = "g2_sigma";
        s.y_overlay = "g2_model";
        s.log_x = true;
        s.legend = LegendCorner::kTopLeft;
    } else if (name == "fig3b_sweep") {
        s.kind = PlotKind::kPoints;
        s.title = "Filtered g2 and retained events versus slope threshold";
        s.schema = "heraldsim.fig3b_sweep/1";
        s.x = "edge_mV_per_ns";
        s.y = "g2";
        s.x_label = "slope threshold (mV/ns)";
        s.y_label = "filtered g2(0)";
        s.y_error = "g2_sigma";
        s.y2 = "retained_fraction";
        s.y2_label = "retained herald fraction";
        s.legend = LegendCorner::kBottomRight;
    } else if (name == "fig4_surface") {
        s.kind = PlotKind::kHeatmap;
        s.title = "Improvement ratio r = g2 click / g2 PNR";
        s.schema = "heraldsim.fig4_surface/1";
        s.x = "lambda_sq";
        s.y = "eta_h";
        s.z = "r";
        s.x_label = "lambda^2";
        s.y_label = "herald efficiency";
        s.z_label = "r";
        s.log_z = true;
    } else if (name == "fig2b_histogram") {
        s.kind = PlotKind::kHistogram;
        s.title = "Rising-edge slope histogram";
        s.schema = "heraldsim.fig2b_histogram/1";
        s.x = "slope_mV_per_ns";
        s.y = "count";
        s.x_label = "slope (mV/ns)";
        s.y_label = "traces per bin";
        s.y_overlay = "fit_count";
    } else if (name == "klyshko_calibration") {
        s.kind = PlotKind::kPoints;
        s.title = "Klyshko efficiency versus pump power";
        s.schema = "heraldsim.klyshko_points/1";
        s.x = "pump_power";
        s.y = "klyshko_estimate";
        s.x_label = "pump power";
        s.y_label = "coincidence-to-singles ratio";
        s.y_error = "klyshko_sigma";
        s.y_overlay = "fit";
        s.legend = LegendCorner::kBottomRight;
    } else {
        throw ConfigError("unknown plot preset '" + std::string(name) + "'");
    }
    return s;
}

}  // namespace heraldsim
