#include "convexdom/gridfn.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace convexdom {

NormTag dual_tag(NormTag t) {
  switch (t) {
    case NormTag::Euclidean: return NormTag::Euclidean;
    case NormTag::Sum: return NormTag::Max;
    case NormTag::Max: return NormTag::Sum;
  }
  return NormTag::Euclidean;
}

double vec_norm(const double* v, int m, NormTag t) {
  double r = 0;
  switch (t) {
    case NormTag::Euclidean:
      for (int j = 0; j < m; ++j) r += v[j] * v[j];
      return std::sqrt(r);
    case NormTag::Sum:
      for (int j = 0; j < m; ++j) r += std::abs(v[j]);
      return r;
    case NormTag::Max:
      for (int j = 0; j < m; ++j) r = std::max(r, std::abs(v[j]));
      return r;
  }
  return r;
}

void norming_vector(const double* v, int m, NormTag t, double* psi) {
  std::fill(psi, psi + m, 0.0);
  double nv = vec_norm(v, m, t);
  if (nv == 0.0) return;
  switch (t) {
    case NormTag::Euclidean:
      for (int j = 0; j < m; ++j) psi[j] = v[j] / nv;
      break;
    case NormTag::Sum:  // dual is sup norm: sign vector
      for (int j = 0; j < m; ++j) psi[j] = (v[j] > 0) - (v[j] < 0);
      break;
    case NormTag::Max: {  // dual is sum norm: unit mass at the largest entry
      int jmax = 0;
      for (int j = 1; j < m; ++j)
        if (std::abs(v[j]) > std::abs(v[jmax])) jmax = j;
      psi[jmax] = (v[jmax] > 0) ? 1.0 : -1.0;
      break;
    }
  }
}

GridFunction GridFunction::component(int i) const {
  GridFunction out(grid, 1, m, norm);
  const std::int64_t N = grid.cell_count();
  for (std::int64_t c = 0; c < N; ++c)
    for (int j = 0; j < m; ++j) out.at(c, 0, j) = at(c, i, j);
  return out;
}

CellMask GridFunction::support() const {
  CellMask mask(grid);
  const std::int64_t N = grid.cell_count();
  for (std::int64_t c = 0; c < N; ++c) {
    const double* p = cell_ptr(c);
    for (int k = 0; k < n * m; ++k)
      if (p[k] != 0.0) {
        mask.set(c);
        break;
      }
  }
  return mask;
}

GridFunction GridFunction::restricted(const CellMask& mask) const {
  if (!(mask.grid == grid)) throw std::invalid_argument("restricted: grid mismatch");
  GridFunction out = *this;
  const std::int64_t N = grid.cell_count();
  for (std::int64_t c = 0; c < N; ++c)
    if (!mask.get(c))
      for (int k = 0; k < n * m; ++k) out.cell_ptr(c)[k] = 0.0;
  return out;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (values.size() != o.values.size()) throw std::invalid_argument("shape mismatch");
  for (size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}
GridFunction& GridFunction::operator-=(const GridFunction& o) {
  if (values.size() != o.values.size()) throw std::invalid_argument("shape mismatch");
  for (size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}
GridFunction& GridFunction::operator*=(double c) {
  for (auto& v : values) v *= c;
  return *this;
}

double GridFunction::max_abs() const {
  double r = 0;
  for (double v : values) r = std::max(r, std::abs(v));
  return r;
}

GridFunction combine(const GridFunction& f, const Eigen::VectorXd& u) {
  if (u.size() != f.n) throw std::invalid_argument("combine: dimension mismatch");
  GridFunction out(f.grid, 1, f.m, f.norm);
  const std::int64_t N = f.grid.cell_count();
  for (std::int64_t c = 0; c < N; ++c)
    for (int i = 0; i < f.n; ++i)
      for (int j = 0; j < f.m; ++j) out.at(c, 0, j) += u(i) * f.at(c, i, j);
  return out;
}

GridFunction matrix_apply(const Eigen::MatrixXd& R, const GridFunction& f) {
  if (R.cols() != f.n) throw std::invalid_argument("matrix_apply: dimension mismatch");
  GridFunction out(f.grid, int(R.rows()), f.m, f.norm);
  const std::int64_t N = f.grid.cell_count();
  for (std::int64_t c = 0; c < N; ++c)
    for (int i = 0; i < R.rows(); ++i)
      for (int k = 0; k < f.n; ++k)
        for (int j = 0; j < f.m; ++j) out.at(c, i, j) += R(i, k) * f.at(c, k, j);
  return out;
}

double lp_average(const GridFunction& f, const CellMask& region, double p) {
  if (f.n != 1) throw std::invalid_argument("lp_average: expects a single component");
  if (!(region.grid == f.grid)) throw std::invalid_argument("lp_average: grid mismatch");
  std::int64_t cnt = region.count();
  if (cnt == 0) throw std::invalid_argument("lp_average: empty region");
  const std::int64_t N = f.grid.cell_count();
  if (std::isinf(p)) {
    double r = 0;
    for (std::int64_t c = 0; c < N; ++c)
      if (region.get(c)) r = std::max(r, f.magnitude(c));
    return r;
  }
  double s = 0;
  for (std::int64_t c = 0; c < N; ++c)
    if (region.get(c)) s += std::pow(f.magnitude(c), p);
  return std::pow(s / double(cnt), 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) {
  const std::int64_t N = f.grid.cell_count();
  if (std::isinf(p)) {
    double r = 0;
    for (std::int64_t c = 0; c < N; ++c)
      for (int i = 0; i < f.n; ++i) r = std::max(r, f.magnitude(c, i));
    return r;
  }
  double s = 0, vol = f.grid.cell_volume();
  for (std::int64_t c = 0; c < N; ++c)
    for (int i = 0; i < f.n; ++i) s += std::pow(f.magnitude(c, i), p) * vol;
  return std::pow(s, 1.0 / p);
}

namespace {

// sorted distinct nonzero magnitudes with measure of {|f| >= v}
std::vector<std::pair<double, double>> upper_level_sets(const GridFunction& f) {
  if (f.n != 1) throw std::invalid_argument("level sets: expects a single component");
  std::map<double, double> meas;  // magnitude -> measure of cells with that value
  const std::int64_t N = f.grid.cell_count();
  double vol = f.grid.cell_volume();
  for (std::int64_t c = 0; c < N; ++c) {
    double v = f.magnitude(c);
    if (v > 0) meas[v] += vol;
  }
  std::vector<std::pair<double, double>> out;  // ascending values, tail measures
  double tail = 0;
  for (auto it = meas.rbegin(); it != meas.rend(); ++it) {
    tail += it->second;
    out.push_back({it->first, tail});
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

double weak_lp_norm(const GridFunction& f, double p) {
  double best = 0;
  for (auto [v, tail] : upper_level_sets(f)) best = std::max(best, v * std::pow(tail, 1.0 / p));
  return best;
}

double lorentz_q1_norm(const GridFunction& f, double q) {
  auto ls = upper_level_sets(f);
  double s = 0, prev = 0;
  for (auto [v, tail] : ls) {
    s += (v - prev) * std::pow(tail, 1.0 / q);
    prev = v;
  }
  return s;
}

double pairing(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid == g.grid) || f.n != g.n || f.m != g.m)
    throw std::invalid_argument("pairing: shape mismatch");
  double s = 0;
  for (size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * g.values[i];
  return s * f.grid.cell_volume();
}

GridFunction shift(const GridFunction& f, const std::array<std::int64_t, 2>& h) {
  GridFunction out(f.grid, f.n, f.m, f.norm);
  const GridSpec& g = f.grid;
  const std::int64_t N = g.cell_count();
  CellBox rb = g.root_box();
  for (std::int64_t c = 0; c < N; ++c) {
    auto xy = g.coords_of(c);
    std::int64_t sx = xy[0] + h[0], sy = xy[1] + h[1];
    if (sx < rb.lo[0] || sx >= rb.hi[0]) continue;
    if (g.d == 2 && (sy < rb.lo[1] || sy >= rb.hi[1])) continue;
    std::int64_t src = g.index_of(sx, g.d == 2 ? sy : 0);
    for (int k = 0; k < f.n * f.m; ++k) out.cell_ptr(c)[k] = f.cell_ptr(src)[k];
  }
  return out;
}

GridFunction finite_difference(const GridFunction& f, const std::array<std::int64_t, 2>& h) {
  GridFunction out = shift(f, h);
  out -= f;
  return out;
}

GridFunction dilate(const GridFunction& f, int j) {
  GridFunction out = f;
  out.grid.cell_level -= j;
  out.grid.root.level -= j;
  return out;
}

GridFunction convolve(const GridFunction& f, const GridFunction& kernel) {
  if (kernel.grid.cell_level != f.grid.cell_level)
    throw std::invalid_argument("convolve: kernel resolution mismatch");
  if (kernel.n != 1) throw std::invalid_argument("convolve: kernel must have one component");
  const GridSpec& g = f.grid;
  const GridSpec& kg = kernel.grid;
  GridFunction out(g, f.n, f.m, f.norm);
  const std::int64_t N = g.cell_count();
  const std::int64_t K = kg.cell_count();
  double vol = g.cell_volume();
  CellBox rb = g.root_box();
  for (std::int64_t kc = 0; kc < K; ++kc) {
    double kv = kernel.at(kc, 0, 0);
    if (kv == 0.0) continue;
    auto kxy = kg.coords_of(kc);
    for (std::int64_t c = 0; c < N; ++c) {
      auto xy = g.coords_of(c);
      std::int64_t sx = xy[0] - kxy[0], sy = xy[1] - kxy[1];
      if (sx < rb.lo[0] || sx >= rb.hi[0]) continue;
      if (g.d == 2 && (sy < rb.lo[1] || sy >= rb.hi[1])) continue;
      std::int64_t src = g.index_of(sx, g.d == 2 ? sy : 0);
      for (int k = 0; k < f.n * f.m; ++k) out.cell_ptr(c)[k] += kv * f.cell_ptr(src)[k] * vol;
    }
  }
  return out;
}

GridFunction conditional_expectation(const GridFunction& f, int k) {
  const GridSpec& g = f.grid;
  int block_level = -k;
  if (block_level < g.cell_level)
    throw std::invalid_argument("conditional_expectation: averaging cubes finer than cells");
  int shiftbits = std::min(block_level, g.root.level) - g.cell_level;
  std::int64_t bs = std::int64_t(1) << shiftbits;  // block side in cells
  std::int64_t nps = g.cells_per_side();
  std::int64_t blocks = (nps + bs - 1) / bs;
  GridFunction out(g, f.n, f.m, f.norm);
  auto block_loop = [&](std::int64_t bx, std::int64_t by) {
    std::vector<double> acc(std::size_t(f.n) * f.m, 0.0);
    std::int64_t cnt = 0;
    std::int64_t x0 = g.base(0) + bx * bs, y0 = g.d == 2 ? g.base(1) + by * bs : 0;
    for (std::int64_t dy = 0; dy < (g.d == 2 ? bs : 1); ++dy)
      for (std::int64_t dx = 0; dx < bs; ++dx) {
        std::int64_t c = g.index_of(x0 + dx, g.d == 2 ? y0 + dy : 0);
        for (int t = 0; t < f.n * f.m; ++t) acc[std::size_t(t)] += f.cell_ptr(c)[t];
        ++cnt;
      }
    for (auto& a : acc) a /= double(cnt);
    for (std::int64_t dy = 0; dy < (g.d == 2 ? bs : 1); ++dy)
      for (std::int64_t dx = 0; dx < bs; ++dx) {
        std::int64_t c = g.index_of(x0 + dx, g.d == 2 ? y0 + dy : 0);
        for (int t = 0; t < f.n * f.m; ++t) out.cell_ptr(c)[t] = acc[std::size_t(t)];
      }
  };
  for (std::int64_t by = 0; by < (g.d == 2 ? blocks : 1); ++by)
    for (std::int64_t bx = 0; bx < blocks; ++bx) block_loop(bx, by);
  return out;
}

GridFunction maximal_function(const GridFunction& f, double p, MaximalMode mode) {
  if (f.n != 1) throw std::invalid_argument("maximal_function: expects a single component");
  if (std::isinf(p)) throw std::invalid_argument("maximal_function: p must be finite");
  const GridSpec& g = f.grid;
  const std::int64_t N = g.cell_count();
  std::vector<double> fp(static_cast<std::size_t>(N));
  for (std::int64_t c = 0; c < N; ++c) fp[std::size_t(c)] = std::pow(f.magnitude(c), p);

  GridFunction out(g, 1, 1, NormTag::Euclidean);
  std::int64_t nps = g.cells_per_side();

  if (mode == MaximalMode::Dyadic) {
    // best dyadic ancestor average per cell, top-down
    std::vector<double> best(std::size_t(N), 0.0);
    for (int lvl = g.root.level; lvl >= g.cell_level; --lvl) {
      std::int64_t bs = std::int64_t(1) << (lvl - g.cell_level);
      for (std::int64_t by = 0; by < (g.d == 2 ? nps / bs : 1); ++by)
        for (std::int64_t bx = 0; bx < nps / bs; ++bx) {
          double s = 0;
          for (std::int64_t dy = 0; dy < (g.d == 2 ? bs : 1); ++dy)
            for (std::int64_t dx = 0; dx < bs; ++dx)
              s += fp[std::size_t(g.index_of(g.base(0) + bx * bs + dx,
                                             g.d == 2 ? g.base(1) + by * bs + dy : 0))];
          double avg = s / double(bs * (g.d == 2 ? bs : 1));
          for (std::int64_t dy = 0; dy < (g.d == 2 ? bs : 1); ++dy)
            for (std::int64_t dx = 0; dx < bs; ++dx) {
              std::int64_t c = g.index_of(g.base(0) + bx * bs + dx,
                                          g.d == 2 ? g.base(1) + by * bs + dy : 0);
              best[std::size_t(c)] = std::max(best[std::size_t(c)], avg);
            }
        }
    }
    for (std::int64_t c = 0; c < N; ++c) out.at(c) = std::pow(best[std::size_t(c)], 1.0 / p);
    return out;
  }

  // all cell-aligned axis-parallel cubes fully inside the root
  std::vector<double> best(std::size_t(N), 0.0);
  if (g.d == 1) {
    std::vector<double> pre(std::size_t(nps + 1), 0.0);
    for (std::int64_t i = 0; i < nps; ++i) pre[std::size_t(i + 1)] = pre[std::size_t(i)] + fp[std::size_t(i)];
    for (std::int64_t w = 1; w <= nps; ++w) {
      std::vector<double> sums(std::size_t(nps - w + 1));
      for (std::int64_t s = 0; s + w <= nps; ++s)
        sums[std::size_t(s)] = (pre[std::size_t(s + w)] - pre[std::size_t(s)]) / double(w);
      // cell i is covered by window starts in [i-w+1, i]; sliding max
      std::int64_t nw = nps - w + 1;
      std::deque<std::int64_t> dq;
      for (std::int64_t i = 0; i < nps; ++i) {
        if (i < nw) {
          while (!dq.empty() && sums[std::size_t(dq.back())] <= sums[std::size_t(i)]) dq.pop_back();
          dq.push_back(i);
        }
        while (dq.front() < i - w + 1) dq.pop_front();
        best[std::size_t(i)] = std::max(best[std::size_t(i)], sums[std::size_t(dq.front())]);
      }
    }
  } else {
    // 2-d: prefix sums + separable max filter per window size
    auto pre = std::vector<double>(std::size_t((nps + 1) * (nps + 1)), 0.0);
    auto P = [&](std::int64_t x, std::int64_t y) -> double& {
      return pre[std::size_t(y * (nps + 1) + x)];
    };
    for (std::int64_t y = 0; y < nps; ++y)
      for (std::int64_t x = 0; x < nps; ++x)
        P(x + 1, y + 1) = fp[std::size_t(y * nps + x)] + P(x, y + 1) + P(x + 1, y) - P(x, y);
    for (std::int64_t w = 1; w <= nps; ++w) {
      std::int64_t nw = nps - w + 1;
      std::vector<double> sums(std::size_t(nw * nw));
      for (std::int64_t y = 0; y < nw; ++y)
        for (std::int64_t x = 0; x < nw; ++x)
          sums[std::size_t(y * nw + x)] =
              (P(x + w, y + w) - P(x, y + w) - P(x + w, y) + P(x, y)) / double(w * w);
      // max over the w x w block of window starts covering each cell
      std::vector<double> rowmax(std::size_t(nw * nps), -kInf);
      for (std::int64_t y = 0; y < nw; ++y) {
        std::vector<double> row(sums.begin() + y * nw, sums.begin() + (y + 1) * nw);
        for (std::int64_t i = 0; i < nps; ++i) {
          std::int64_t lo = std::max<std::int64_t>(0, i - w + 1), hi = std::min(i, nw - 1);
          double bestv = -kInf;
          for (std::int64_t s = lo; s <= hi; ++s) bestv = std::max(bestv, row[std::size_t(s)]);
          rowmax[std::size_t(y * nps + i)] = bestv;
        }
      }
      for (std::int64_t i = 0; i < nps; ++i) {
        std::vector<double> col(static_cast<std::size_t>(nw));
        for (std::int64_t y = 0; y < nw; ++y) col[std::size_t(y)] = rowmax[std::size_t(y * nps + i)];
        for (std::int64_t j = 0; j < nps; ++j) {
          std::int64_t lo = std::max<std::int64_t>(0, j - w + 1), hi = std::min(j, nw - 1);
          double bestv = -kInf;
          for (std::int64_t s = lo; s <= hi; ++s) bestv = std::max(bestv, col[std::size_t(s)]);
          best[std::size_t(j * nps + i)] = std::max(best[std::size_t(j * nps + i)], bestv);
        }
      }
    }
  }
  for (std::int64_t c = 0; c < N; ++c) out.at(c) = std::pow(best[std::size_t(c)], 1.0 / p);
  return out;
}

}  // namespace convexdom
