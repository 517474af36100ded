#include "kpent/convolve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ddouble.hpp"
#include "kpent/errors.hpp"

namespace kpent {

using detail::CDD;
using detail::DD;

namespace {

constexpr double kTrimThreshold = 1e-16;
constexpr double kClampLimit = 1e-10;
constexpr double kFftFloor = 1e-28;

void check_compatible(const DensityGrid& f, const DensityGrid& g) {
  if (f.dim() != g.dim()) throw IncompatibleGridError("convolve: grids differ in dimension");
  if (f.spacing() != g.spacing()) throw IncompatibleGridError("convolve: grids differ in spacing");
}

GridSpec sum_spec(const GridSpec& a, const GridSpec& b) {
  GridSpec s;
  s.dim = a.dim;
  s.spacing = a.spacing;
  s.origin.resize(a.dim);
  s.shape.resize(a.dim);
  for (int i = 0; i < a.dim; ++i) {
    s.origin[i] = a.origin[i] + b.origin[i] + 0.5 * a.spacing;
    s.shape[i] = a.shape[i] + b.shape[i] - 1;
  }
  s.validate();
  return s;
}

// Offsets of every cell of `in` expressed in the strides of `out`.
std::vector<std::size_t> offsets_in(const GridSpec& in, const GridSpec& out) {
  const auto st = out.strides();
  std::vector<std::size_t> off(in.cell_count());
  for (std::size_t i = 0; i < off.size(); ++i) {
    const auto idx = in.unflatten(i);
    std::size_t o = 0;
    for (int a = 0; a < in.dim; ++a) o += static_cast<std::size_t>(idx[a] * st[a]);
    off[i] = o;
  }
  return off;
}

// Clamp round-off negatives, trim empty boundary slabs and renormalize.
DensityGrid finalize(GridSpec spec, std::vector<double> values) {
  double clamped = 0.0;
  for (double& v : values) {
    if (v < 0.0) {
      clamped -= v;
      v = 0.0;
    }
  }
  if (clamped >= kClampLimit) throw NumericError("convolve: clamped negative mass " + std::to_string(clamped) + " exceeds 1e-10");

  const int d = spec.dim;
  std::vector<std::vector<double>> slab_max(d);
  for (int a = 0; a < d; ++a) slab_max[a].assign(spec.shape[a], 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    const auto idx = spec.unflatten(i);
    for (int a = 0; a < d; ++a) slab_max[a][idx[a]] = std::max(slab_max[a][idx[a]], values[i]);
  }
  std::vector<std::int64_t> lo(d), hi(d);
  bool trimmed = false;
  for (int a = 0; a < d; ++a) {
    std::int64_t l = 0;
    std::int64_t h = spec.shape[a];
    while (h - l > 1 && slab_max[a][l] < kTrimThreshold) ++l;
    while (h - l > 1 && slab_max[a][h - 1] < kTrimThreshold) --h;
    lo[a] = l;
    hi[a] = h;
    trimmed = trimmed || l > 0 || h < spec.shape[a];
  }
  if (!trimmed) return DensityGrid(std::move(spec), std::move(values)).normalized();

  GridSpec out = spec;
  for (int a = 0; a < d; ++a) {
    out.origin[a] = spec.origin[a] + static_cast<double>(lo[a]) * spec.spacing;
    out.shape[a] = hi[a] - lo[a];
  }
  std::vector<double> kept(out.cell_count());
  std::vector<std::int64_t> src(d);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto idx = out.unflatten(i);
    for (int a = 0; a < d; ++a) src[a] = idx[a] + lo[a];
    kept[i] = values[spec.flatten(src)];
  }
  return DensityGrid(std::move(out), std::move(kept)).normalized();
}

bool canonical_less(const DensityGrid& a, const DensityGrid& b) {
  if (a.spec().origin != b.spec().origin) return a.spec().origin < b.spec().origin;
  if (a.spec().shape != b.spec().shape) return a.spec().shape < b.spec().shape;
  const auto ma = a.masses();
  const auto mb = b.masses();
  return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

// --- double-double FFT -------------------------------------------------------

// (cos, sin) of pi * x for x = 2k/n in [0, 1/4], by Taylor series.
std::pair<DD, DD> dd_cos_sin_small(DD theta) {
  const DD x2 = theta * theta;
  DD term = theta;
  DD s = theta;
  DD c{1.0, 0.0};
  DD cterm{1.0, 0.0};
  for (int n = 1; n < 40; ++n) {
    cterm = detail::dd_div(-(cterm * x2), DD{static_cast<double>((2 * n - 1) * (2 * n)), 0.0});
    term = detail::dd_div(-(term * x2), DD{static_cast<double>((2 * n) * (2 * n + 1)), 0.0});
    c = c + cterm;
    s = s + term;
    if (std::abs(term.hi) < 1e-34 && std::abs(cterm.hi) < 1e-34) break;
  }
  return {c, s};
}

// w[k] = (cos 2 pi k / n, sin 2 pi k / n) for k < n / 2.
std::vector<CDD> twiddles(std::size_t n) {
  std::vector<CDD> w(std::max<std::size_t>(n / 2, 1));
  if (n < 2) {
    w[0] = {DD{1.0, 0.0}, DD{}};
    return w;
  }
  auto base = [n](std::size_t k) {
    const DD theta = detail::kPiDD * (2.0 * static_cast<double>(k) / static_cast<double>(n));
    return dd_cos_sin_small(theta);
  };
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t k8 = 8 * k;
    if (k8 <= n) {
      auto [c, s] = base(k);
      w[k] = {c, s};
    } else if (4 * k <= n) {
      auto [c, s] = base(n / 4 - k);
      w[k] = {s, c};
    } else {
      const std::size_t m = n / 2 - k;
      if (8 * m <= n) {
        auto [c, s] = base(m);
        w[k] = {-c, s};
      } else {
        auto [c, s] = base(n / 4 - m);
        w[k] = {-s, c};
      }
    }
  }
  return w;
}

void fft_inplace(std::vector<CDD>& a, const std::vector<CDD>& w, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        CDD tw = w[j * step];
        if (!inverse) tw.im = -tw.im;
        const CDD u = a[start + j];
        const CDD v = a[start + j + half] * tw;
        a[start + j] = u + v;
        a[start + j + half] = u - v;
      }
    }
  }
}

void fft_nd(std::vector<CDD>& data, const std::vector<std::size_t>& dims, bool inverse) {
  const std::size_t total = data.size();
  std::size_t stride = total;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    const std::size_t n = dims[axis];
    stride /= n;
    if (n < 2) continue;
    const auto w = twiddles(n);
    std::vector<CDD> line(n);
    for (std::size_t outer = 0; outer < total; outer += n * stride) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
        fft_inplace(line, w, inverse);
        for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = line[i];
      }
    }
  }
}

std::vector<CDD> embed(const DensityGrid& f, const std::vector<std::size_t>& padded) {
  std::size_t total = 1;
  for (auto n : padded) total *= n;
  std::vector<CDD> out(total);
  const GridSpec& s = f.spec();
  const auto m = f.masses();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0.0) continue;
    const auto idx = s.unflatten(i);
    std::size_t o = 0;
    for (int a = 0; a < s.dim; ++a) o = o * padded[a] + static_cast<std::size_t>(idx[a]);
    out[o].re = DD{m[i], 0.0};
  }
  return out;
}

}  // namespace

DensityGrid convolve_direct(const DensityGrid& f_in, const DensityGrid& g_in) {
  check_compatible(f_in, g_in);
  const bool swap = canonical_less(g_in, f_in);
  const DensityGrid& f = swap ? g_in : f_in;
  const DensityGrid& g = swap ? f_in : g_in;
  const GridSpec out = sum_spec(f.spec(), g.spec());
  const auto off_f = offsets_in(f.spec(), out);
  const auto off_g = offsets_in(g.spec(), out);
  std::vector<DD> acc(out.cell_count());
  const auto mf = f.masses();
  const auto mg = g.masses();
  for (std::size_t a = 0; a < mf.size(); ++a) {
    if (mf[a] == 0.0) continue;
    for (std::size_t b = 0; b < mg.size(); ++b) {
      if (mg[b] == 0.0) continue;
      DD& cell = acc[off_f[a] + off_g[b]];
      cell = cell + detail::two_prod(mf[a], mg[b]);
    }
  }
  std::vector<double> values(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) values[i] = acc[i].hi + acc[i].lo;
  return finalize(out, std::move(values));
}

DensityGrid convolve(const DensityGrid& f, const DensityGrid& g) {
  check_compatible(f, g);
  const GridSpec out = sum_spec(f.spec(), g.spec());
  std::vector<std::size_t> padded(out.dim);
  for (int a = 0; a < out.dim; ++a) padded[a] = std::bit_ceil(static_cast<std::size_t>(out.shape[a]));

  auto ff = embed(f, padded);
  auto gg = embed(g, padded);
  fft_nd(ff, padded, false);
  fft_nd(gg, padded, false);
  for (std::size_t i = 0; i < ff.size(); ++i) ff[i] = ff[i] * gg[i];
  fft_nd(ff, padded, true);

  std::size_t total = 1;
  for (auto n : padded) total *= n;
  const double inv_n = 1.0 / static_cast<double>(total);
  std::vector<double> values(out.cell_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto idx = out.unflatten(i);
    std::size_t o = 0;
    for (int a = 0; a < out.dim; ++a) o = o * padded[a] + static_cast<std::size_t>(idx[a]);
    const DD v = ff[o].re * inv_n;
    const double x = v.hi + v.lo;
    values[i] = std::abs(x) < kFftFloor ? 0.0 : x;
  }
  return finalize(out, std::move(values));
}

}  // namespace kpent
