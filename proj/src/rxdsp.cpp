#include "olink/rxdsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "olink/fft.hpp"
#include "olink/math_util.hpp"

namespace olink {

double BerCount::ratio() const {
  if (total == 0) throw std::logic_error("BerCount: empty count");
  return static_cast<double>(errors) / static_cast<double>(total);
}

namespace {

// corr[off] = sum_k s[(k+off) mod L] * t[k], computed via FFT.
cvec cyclic_xcorr(const cvec& s, const cvec& tpl_fft) {
  cvec S = fft(s);
  for (std::size_t k = 0; k < S.size(); ++k) S[k] *= std::conj(tpl_fft[k]);
  return ifft(S);
}

std::size_t cyclic_dist(std::size_t a, std::size_t b, std::size_t n) {
  const std::size_t d = (a >= b) ? a - b : b - a;
  return std::min(d, n - d);
}

}  // namespace

FrameSyncResult frame_sync(const cvec& x_2sps, const cvec& y_2sps,
                           const std::vector<double>& training_template,
                           double symbol_rate, double peak_threshold,
                           std::size_t alias_delay) {
  const std::size_t n2 = x_2sps.size();
  const std::size_t n_sym = n2 / 2;
  if (y_2sps.size() != n2)
    throw std::invalid_argument("frame_sync: stream length mismatch");
  if (training_template.size() != n_sym)
    throw std::invalid_argument(
        "frame_sync: template length must equal the frame length in symbols");

  cvec tpl(n_sym);
  for (std::size_t k = 0; k < n_sym; ++k) tpl[k] = training_template[k];
  const cvec tpl_fft = fft(tpl);

  // Joint search over both streams and both T/2 phases; the combined
  // magnitude sqrt(|cx|^2 + |cy|^2) is SOP-invariant for a unitary channel.
  std::array<std::array<cvec, 2>, 2> stream_fft;  // [stream][phase]
  std::array<std::array<cvec, 2>, 2> corr;        // [stream][phase]
  for (int ph = 0; ph < 2; ++ph) {
    cvec sx(n_sym), sy(n_sym);
    for (std::size_t k = 0; k < n_sym; ++k) {
      sx[k] = x_2sps[2 * k + static_cast<std::size_t>(ph)];
      sy[k] = y_2sps[2 * k + static_cast<std::size_t>(ph)];
    }
    stream_fft[0][ph] = fft(sx);
    stream_fft[1][ph] = fft(sy);
    for (int st = 0; st < 2; ++st) {
      cvec prod = stream_fft[st][ph];
      for (std::size_t k = 0; k < n_sym; ++k) prod[k] *= std::conj(tpl_fft[k]);
      corr[st][ph] = ifft(prod);
    }
  }

  std::vector<std::array<double, 2>> metric(n_sym);
  for (std::size_t off = 0; off < n_sym; ++off)
    for (int ph = 0; ph < 2; ++ph)
      metric[off][ph] = std::hypot(std::abs(corr[0][ph][off]),
                                   std::abs(corr[1][ph][off]));

  // Offsets where a reference metric (the template correlated with itself)
  // is strong carry expected correlation energy -- PRBS periodicity and the
  // regular header spacing -- and are not evidence against a lock, so the
  // sidelobe scan skips them. Dilated by +/-2 symbols because the T/2
  // sample phases see the pulse tails of every structural peak.
  auto structural_mask = [&](const std::vector<double>& self) {
    const double ref0 = self[0];
    std::vector<char> strong(n_sym, 0);
    for (std::size_t s = 0; s < n_sym; ++s)
      strong[s] = (self[s] > 0.2 * ref0) ? 1 : 0;
    std::vector<char> mask(n_sym, 0);
    for (std::size_t s = 0; s < n_sym; ++s) {
      for (int d = -2; d <= 2; ++d) {
        const std::size_t q =
            (s + n_sym + static_cast<std::size_t>(d + 2) - 2) % n_sym;
        if (strong[q]) {
          mask[s] = 1;
          break;
        }
      }
    }
    return mask;
  };

  struct ScanResult {
    std::size_t off = 0;
    int phase = 0;
    double best = -1.0;
    double side = 0.0;
  };
  auto scan = [&](const std::vector<std::array<double, 2>>& met,
                  const std::vector<char>& structural) {
    ScanResult r;
    for (std::size_t off = 0; off < n_sym; ++off) {
      for (int ph = 0; ph < 2; ++ph) {
        if (met[off][ph] > r.best) {
          r.best = met[off][ph];
          r.off = off;
          r.phase = ph;
        }
      }
    }
    auto is_excluded = [&](std::size_t off, std::size_t ref) {
      if (cyclic_dist(off, ref, n_sym) <= 2) return true;
      return structural[(off + n_sym - ref % n_sym) % n_sym] != 0;
    };
    for (std::size_t off = 0; off < n_sym; ++off) {
      if (is_excluded(off, r.off)) continue;
      if (alias_delay > 0) {
        const std::size_t a1 = (r.off + alias_delay) % n_sym;
        const std::size_t a2 = (r.off + n_sym - alias_delay % n_sym) % n_sym;
        if (is_excluded(off, a1) || is_excluded(off, a2)) continue;
      }
      r.side = std::max(r.side, std::max(met[off][0], met[off][1]));
    }
    return r;
  };

  std::vector<double> self_coherent(n_sym);
  {
    cvec acf_in(n_sym);
    for (std::size_t k = 0; k < n_sym; ++k) acf_in[k] = std::norm(tpl_fft[k]);
    const cvec acf = ifft(acf_in);
    for (std::size_t s = 0; s < n_sym; ++s) self_coherent[s] = std::abs(acf[s]);
  }
  ScanResult pick = scan(metric, structural_mask(self_coherent));

  // Contiguous training runs (preamble, then the interior blocks).
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // (start, len)
  for (std::size_t i = 0; i < n_sym;) {
    if (training_template[i] != 0.0) {
      std::size_t j = i;
      while (j < n_sym && training_template[j] != 0.0) ++j;
      runs.push_back({i, j - i});
      i = j;
    } else {
      ++i;
    }
  }

  cdouble cx, cy;
  if (pick.side > 0.0 && pick.best / pick.side < peak_threshold) {
    // Fallback for large carrier frequency offsets: the full-frame coherent
    // sum washes out once the carrier turns over within the frame, but each
    // short training run stays coherent, so combine run correlations by
    // power instead of by phasor.
    std::vector<cvec> run_corr_fft(runs.size());  // per-run template FFTs
    for (std::size_t b = 0; b < runs.size(); ++b) {
      cvec t(n_sym, cdouble{0.0, 0.0});
      for (std::size_t i = runs[b].first; i < runs[b].first + runs[b].second;
           ++i)
        t[i] = training_template[i];
      run_corr_fft[b] = fft(t);
    }
    std::vector<std::array<double, 2>> seg(n_sym, {0.0, 0.0});
    std::array<std::array<cvec, 2>, 2> run0_corr;  // kept for phase/weights
    for (int ph = 0; ph < 2; ++ph) {
      for (int st = 0; st < 2; ++st) {
        for (std::size_t b = 0; b < runs.size(); ++b) {
          cvec prod = stream_fft[st][ph];
          for (std::size_t k = 0; k < n_sym; ++k)
            prod[k] *= std::conj(run_corr_fft[b][k]);
          const cvec c = ifft(prod);
          for (std::size_t off = 0; off < n_sym; ++off)
            seg[off][ph] += std::norm(c[off]);
          if (b == 0) run0_corr[st][ph] = c;
        }
      }
    }
    // Reference metric for the structural mask: the template against itself
    // through the same per-run power combining.
    std::vector<double> self_seg(n_sym, 0.0);
    for (std::size_t b = 0; b < runs.size(); ++b) {
      cvec prod = tpl_fft;
      for (std::size_t k = 0; k < n_sym; ++k)
        prod[k] *= std::conj(run_corr_fft[b][k]);
      const cvec c = ifft(prod);
      for (std::size_t off = 0; off < n_sym; ++off)
        self_seg[off] += std::norm(c[off]);
    }
    const ScanResult seg_pick = scan(seg, structural_mask(self_seg));
    if (seg_pick.side > 0.0 && seg_pick.best / seg_pick.side < peak_threshold)
      throw std::runtime_error("frame_sync: correlation peak below threshold");
    pick = seg_pick;
    metric = seg;
    cx = run0_corr[0][pick.phase][pick.off];
    cy = run0_corr[1][pick.phase][pick.off];
  } else {
    cx = corr[0][pick.phase][pick.off];
    cy = corr[1][pick.phase][pick.off];
  }
  const std::size_t best_off = pick.off;
  const int best_phase = pick.phase;
  const double best_mag = pick.best;
  const double side_mag = pick.side;

  // With a PolMux alias the lock may be on either tributary's training
  // copy. Report the offset of the undelayed tributary: if the companion
  // peak sits at -delay rather than +delay, the lock is on the delayed
  // copy and the offset is normalized back.
  std::size_t report_off = best_off;
  if (alias_delay > 0) {
    const std::size_t d = alias_delay % n_sym;
    const std::size_t plus = (best_off + d) % n_sym;
    const std::size_t minus = (best_off + n_sym - d) % n_sym;
    const double m_plus = std::max(metric[plus][0], metric[plus][1]);
    const double m_minus = std::max(metric[minus][0], metric[minus][1]);
    if (m_minus > m_plus) report_off = minus;
  }

  FrameSyncResult r;
  r.offset_symbols = report_off;
  r.sample_phase = best_phase;
  r.peak_to_sidelobe = (side_mag > 0.0) ? best_mag / side_mag : best_mag;
  // Coarse phase/polarity of the stronger stream (informational; the
  // data-aided equalizer absorbs any static rotation).
  r.coarse_phase_rad = std::arg(std::abs(cx) >= std::abs(cy) ? cx : cy);
  r.polarity_inverted = std::abs(r.coarse_phase_rad) > M_PI / 2.0;

  // Frequency offset, after matched combining of the two streams (for a
  // unitary SOP the combiner conj(cx)*x + conj(cy)*y nulls the other
  // tributary exactly). De-rotated training phasor per header position:
  auto combined = [&](std::size_t i) {
    const std::size_t idx =
        2 * ((best_off + i) % n_sym) + static_cast<std::size_t>(best_phase);
    const cdouble u =
        std::conj(cx) * x_2sps[idx] + std::conj(cy) * y_2sps[idx];
    return u * training_template[i];
  };

  // Coarse: lag-phasor ladder over the contiguous preamble. Each stage
  // refines the previous estimate with a longer lag; no phase unwrapping,
  // so it stays robust at low SNR.
  std::size_t p = 0;
  while (p < n_sym && training_template[p] != 0.0) ++p;
  double f_coarse = 0.0;
  if (p >= 8) {
    cvec u(p);
    for (std::size_t i = 0; i < p; ++i) u[i] = combined(i);
    for (std::size_t lag : {std::size_t{1}, std::size_t{4}, std::size_t{16},
                            std::size_t{64}, std::size_t{128}}) {
      if (lag * 2 > p) break;
      const double w = 2.0 * M_PI * f_coarse / symbol_rate;
      cdouble acc{0.0, 0.0};
      for (std::size_t i = 0; i + lag < p; ++i)
        acc += u[i + lag] * std::conj(u[i]);
      acc *= std::exp(cdouble{0.0, -w * static_cast<double>(lag)});
      f_coarse += std::arg(acc) / (2.0 * M_PI * static_cast<double>(lag)) *
                  symbol_rate;
    }
  }
  r.freq_offset_hz = f_coarse;

  // Fine: phasor products between consecutive equally spaced interior
  // header blocks -- accurate but periodic in symbol_rate / spacing.
  if (runs.size() >= 3) {
    std::vector<cdouble> centroid(runs.size());
    std::vector<double> center(runs.size());
    for (std::size_t b = 0; b < runs.size(); ++b) {
      cdouble acc{0.0, 0.0};
      for (std::size_t i = runs[b].first; i < runs[b].first + runs[b].second;
           ++i)
        acc += combined(i);
      centroid[b] = acc;
      center[b] = static_cast<double>(runs[b].first) +
                  0.5 * static_cast<double>(runs[b].second - 1);
    }
    // Modal spacing between consecutive run centers.
    std::map<long, int> spacing_count;
    for (std::size_t b = 1; b < runs.size(); ++b)
      ++spacing_count[std::lround(center[b] - center[b - 1])];
    long spacing = 0;
    int best_count = 0;
    for (const auto& [s, cnt] : spacing_count)
      if (cnt > best_count) { best_count = cnt; spacing = s; }
    if (best_count >= 2 && spacing > 0) {
      cdouble prod{0.0, 0.0};
      for (std::size_t b = 1; b < runs.size(); ++b)
        if (std::lround(center[b] - center[b - 1]) == spacing)
          prod += centroid[b] * std::conj(centroid[b - 1]);
      const double grid = symbol_rate / static_cast<double>(spacing);
      const double f_fine = std::arg(prod) / (2.0 * M_PI) *
                            symbol_rate / static_cast<double>(spacing);
      // Pick the grating multiple from the coarse estimate; accept a
      // nonzero multiple only when the coarse value is consistent with it.
      const double n_real = (f_coarse - f_fine) / grid;
      const long n = std::lround(n_real);
      const double candidate = f_fine + static_cast<double>(n) * grid;
      if (n == 0 || std::abs(f_coarse - candidate) < 0.25 * grid)
        r.freq_offset_hz = candidate;
    }
  }
  return r;
}

FrameSyncResult frame_sync(const cvec& stream_2sps,
                           const std::vector<double>& training_template,
                           double symbol_rate, double peak_threshold,
                           std::size_t alias_delay) {
  const cvec zeros(stream_2sps.size(), cdouble{0.0, 0.0});
  return frame_sync(stream_2sps, zeros, training_template, symbol_rate,
                    peak_threshold, alias_delay);
}

namespace {

void normalize_rms(cvec& v) {
  double acc = 0.0;
  for (const auto& s : v) acc += std::norm(s);
  const double rms = std::sqrt(acc / static_cast<double>(v.size()));
  if (rms > 0.0)
    for (auto& s : v) s /= rms;
}

}  // namespace

MimoOutput mimo_equalize_da(const cvec& x_2sps, const cvec& y_2sps,
                            const std::vector<double>& ref_x,
                            const std::vector<double>& ref_y,
                            const std::vector<char>& known_x,
                            const std::vector<char>& known_y,
                            const MimoConfig& cfg) {
  const std::size_t n2 = x_2sps.size();
  const std::size_t n_sym = ref_x.size();
  if (y_2sps.size() != n2 || ref_y.size() != n_sym ||
      known_x.size() != n_sym || known_y.size() != n_sym || 2 * n_sym != n2)
    throw std::invalid_argument("mimo_equalize_da: size mismatch");
  const int taps = cfg.num_taps;
  const int center = (taps - 1) / 2;

  MimoOutput out;
  out.state.hxx.assign(taps, cdouble{0.0, 0.0});
  out.state.hxy.assign(taps, cdouble{0.0, 0.0});
  out.state.hyx.assign(taps, cdouble{0.0, 0.0});
  out.state.hyy.assign(taps, cdouble{0.0, 0.0});
  out.state.hxx[center] = 1.0;
  out.state.hyy[center] = 1.0;

  auto filter_at = [&](const cvec& ha, const cvec& hb, std::size_t k) {
    cdouble acc{0.0, 0.0};
    for (int t = 0; t < taps; ++t) {
      const std::size_t idx = (2 * k + n2 + center - t) % n2;
      acc += ha[t] * x_2sps[idx] + hb[t] * y_2sps[idx];
    }
    return acc;
  };

  auto train_row = [&](cvec& ha, cvec& hb, const std::vector<double>& ref,
                       const std::vector<char>& known) {
    double mse = 0.0;
    std::size_t count = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      mse = 0.0;
      count = 0;
      for (std::size_t k = 0; k < n_sym; ++k) {
        if (!known[k]) continue;
        const cdouble y = filter_at(ha, hb, k);
        const cdouble e = cdouble{ref[k], 0.0} - y;
        for (int t = 0; t < taps; ++t) {
          const std::size_t idx = (2 * k + n2 + center - t) % n2;
          ha[t] += cfg.mu_train * e * std::conj(x_2sps[idx]);
          hb[t] += cfg.mu_train * e * std::conj(y_2sps[idx]);
        }
        mse += std::norm(e);
        ++count;
      }
    }
    return (count > 0) ? mse / static_cast<double>(count) : 0.0;
  };

  const double mse_x =
      train_row(out.state.hxx, out.state.hxy, ref_x, known_x);
  const double mse_y =
      train_row(out.state.hyx, out.state.hyy, ref_y, known_y);
  out.state.final_training_mse = std::max(mse_x, mse_y);
  out.state.converged = out.state.final_training_mse <= cfg.train_mse_limit;
  if (!out.state.converged)
    throw std::runtime_error("mimo_equalize_da: training MSE above limit");

  out.out_x.resize(n_sym);
  out.out_y.resize(n_sym);
  for (std::size_t k = 0; k < n_sym; ++k) {
    out.out_x[k] = filter_at(out.state.hxx, out.state.hxy, k);
    out.out_y[k] = filter_at(out.state.hyx, out.state.hyy, k);
    if (cfg.track_payload && known_x[k]) {
      // slow tracking on training positions only
      const cdouble ex = cdouble{ref_x[k], 0.0} - out.out_x[k];
      const cdouble ey = cdouble{ref_y[k], 0.0} - out.out_y[k];
      for (int t = 0; t < taps; ++t) {
        const std::size_t idx = (2 * k + n2 + center - t) % n2;
        out.state.hxx[t] += cfg.mu_track * ex * std::conj(x_2sps[idx]);
        out.state.hxy[t] += cfg.mu_track * ex * std::conj(y_2sps[idx]);
        out.state.hyx[t] += cfg.mu_track * ey * std::conj(x_2sps[idx]);
        out.state.hyy[t] += cfg.mu_track * ey * std::conj(y_2sps[idx]);
      }
    }
  }
  normalize_rms(out.out_x);
  normalize_rms(out.out_y);
  return out;
}

MimoOutput mimo_refine_da(const cvec& x_2sps, const cvec& y_2sps,
                          const cvec& ref_x, const cvec& ref_y,
                          const EqualizerState& init, double ridge) {
  const std::size_t n2 = x_2sps.size();
  const std::size_t n_sym = ref_x.size();
  const int taps = static_cast<int>(init.hxx.size());
  if (y_2sps.size() != n2 || ref_y.size() != n_sym || 2 * n_sym != n2 ||
      taps == 0 || init.hxy.size() != init.hxx.size() ||
      init.hyx.size() != init.hxx.size() || init.hyy.size() != init.hxx.size())
    throw std::invalid_argument("mimo_refine_da: size mismatch");
  if (!(ridge >= 0.0))
    throw std::invalid_argument("mimo_refine_da: bad ridge");
  const int center = (taps - 1) / 2;
  const int dim = 2 * taps;  // branch a: input (a < taps ? x : y), lag a%taps

  auto sample = [&](int a, std::size_t k) {
    const int t = a % taps;
    const std::size_t idx = (2 * k + n2 + center - t) % n2;
    return (a < taps) ? x_2sps[idx] : y_2sps[idx];
  };

  // Normal equations: A w = rhs, A shared between the two output rows.
  std::vector<cdouble> A(static_cast<std::size_t>(dim) * dim, cdouble{0, 0});
  std::vector<cdouble> rhs_x(dim, cdouble{0, 0}), rhs_y(dim, cdouble{0, 0});
  std::vector<cdouble> u(dim);
  for (std::size_t k = 0; k < n_sym; ++k) {
    for (int a = 0; a < dim; ++a) u[a] = sample(a, k);
    for (int b = 0; b < dim; ++b) {
      const cdouble ub = std::conj(u[b]);
      for (int a = b; a < dim; ++a) A[b * dim + a] += ub * u[a];
      rhs_x[b] += ub * ref_x[k];
      rhs_y[b] += ub * ref_y[k];
    }
  }
  double trace = 0.0;
  for (int a = 0; a < dim; ++a) trace += A[a * dim + a].real();
  const double load = ridge * trace / dim;
  for (int a = 0; a < dim; ++a) {
    A[a * dim + a] += load;
    for (int b = a + 1; b < dim; ++b)
      A[b * dim + a] = std::conj(A[a * dim + b]);
  }

  // Cholesky A = L L^H, then two triangular solves per row.
  std::vector<cdouble> L(A);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      cdouble s = L[i * dim + j];
      for (int p = 0; p < j; ++p)
        s -= L[i * dim + p] * std::conj(L[j * dim + p]);
      if (i == j) {
        if (s.real() <= 0.0)
          throw std::runtime_error("mimo_refine_da: singular system");
        L[i * dim + i] = std::sqrt(s.real());
      } else {
        L[i * dim + j] = s / L[j * dim + j].real();
      }
    }
    for (int j = i + 1; j < dim; ++j) L[i * dim + j] = cdouble{0, 0};
  }
  auto solve = [&](const std::vector<cdouble>& rhs) {
    std::vector<cdouble> z(dim), w(dim);
    for (int i = 0; i < dim; ++i) {
      cdouble s = rhs[i];
      for (int p = 0; p < i; ++p) s -= L[i * dim + p] * z[p];
      z[i] = s / L[i * dim + i].real();
    }
    for (int i = dim - 1; i >= 0; --i) {
      cdouble s = z[i];
      for (int p = i + 1; p < dim; ++p) s -= std::conj(L[p * dim + i]) * w[p];
      w[i] = s / L[i * dim + i].real();
    }
    return w;
  };
  const auto wx = solve(rhs_x);
  const auto wy = solve(rhs_y);

  MimoOutput out;
  out.state = init;
  for (int t = 0; t < taps; ++t) {
    out.state.hxx[t] = wx[t];
    out.state.hxy[t] = wx[taps + t];
    out.state.hyx[t] = wy[t];
    out.state.hyy[t] = wy[taps + t];
  }

  auto filter_at = [&](const cvec& ha, const cvec& hb, std::size_t k) {
    cdouble acc{0.0, 0.0};
    for (int t = 0; t < taps; ++t) {
      const std::size_t idx = (2 * k + n2 + center - t) % n2;
      acc += ha[t] * x_2sps[idx] + hb[t] * y_2sps[idx];
    }
    return acc;
  };
  out.out_x.resize(n_sym);
  out.out_y.resize(n_sym);
  double mse_x = 0.0, mse_y = 0.0;
  for (std::size_t k = 0; k < n_sym; ++k) {
    out.out_x[k] = filter_at(out.state.hxx, out.state.hxy, k);
    out.out_y[k] = filter_at(out.state.hyx, out.state.hyy, k);
    mse_x += std::norm(out.out_x[k] - ref_x[k]);
    mse_y += std::norm(out.out_y[k] - ref_y[k]);
  }
  out.state.final_training_mse =
      std::max(mse_x, mse_y) / static_cast<double>(n_sym);
  out.state.converged = true;
  normalize_rms(out.out_x);
  normalize_rms(out.out_y);
  return out;
}

BpsResult bps_cpe(const cvec& symbols, const ModFormat& fmt,
                  const BpsConfig& cfg) {
  if (cfg.num_phases < 2 || cfg.block_len < 1)
    throw std::invalid_argument("bps_cpe: bad config");
  const std::size_t n = symbols.size();
  const std::size_t n_blocks = (n + cfg.block_len - 1) / cfg.block_len;

  BpsResult res;
  res.symbols.resize(n);
  res.phase_track.reserve(n_blocks);

  double prev_phase = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t lo = b * cfg.block_len;
    const std::size_t hi = std::min(n, lo + cfg.block_len);
    double best_cost = 1e300, best_phi = 0.0;
    for (int t = 0; t < cfg.num_phases; ++t) {
      const double phi =
          -M_PI / 2.0 + M_PI * static_cast<double>(t) / cfg.num_phases;
      const cdouble rot = std::exp(cdouble{0.0, -phi});
      double cost = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        const cdouble v = symbols[k] * rot;
        const double level =
            fmt.levels[nearest_level_index(v.real(), fmt)];
        cost += (v.real() - level) * (v.real() - level) + v.imag() * v.imag();
      }
      if (cost < best_cost) {
        best_cost = cost;
        best_phi = phi;
      }
    }
    // unwrap: the bipolar constellation repeats every pi
    double phi = best_phi;
    while (phi - prev_phase > M_PI / 2.0) phi -= M_PI;
    while (phi - prev_phase < -M_PI / 2.0) phi += M_PI;
    prev_phase = phi;
    res.phase_track.push_back(phi);
    const cdouble rot = std::exp(cdouble{0.0, -phi});
    for (std::size_t k = lo; k < hi; ++k) res.symbols[k] = symbols[k] * rot;
  }
  return res;
}

std::array<std::vector<double>, 4> dd_equalize_4x4(
    const std::array<std::vector<double>, 4>& streams, const ModFormat& fmt,
    const DdConfig& cfg) {
  const std::size_t n = streams[0].size();
  for (const auto& s : streams)
    if (s.size() != n)
      throw std::invalid_argument("dd_equalize_4x4: size mismatch");
  const int taps = cfg.num_taps;
  const int center = (taps - 1) / 2;

  // h[i][j][t]: contribution of input j to output i
  std::vector<std::vector<std::vector<double>>> h(
      4, std::vector<std::vector<double>>(4, std::vector<double>(taps, 0.0)));
  for (int i = 0; i < 4; ++i) h[i][i][center] = 1.0;

  std::array<std::vector<double>, 4> out;
  for (auto& o : out) o.resize(n);

  double start_mse = -1.0, run_mse = 0.0;
  const std::size_t mse_window = std::max<std::size_t>(256, n / 32);
  std::size_t window_count = 0;

  for (std::size_t k = 0; k < n; ++k) {
    double y[4];
    for (int i = 0; i < 4; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 4; ++j)
        for (int t = 0; t < taps; ++t)
          acc += h[i][j][t] * streams[j][(k + n + center - t) % n];
      y[i] = acc;
    }
    const double dx = fmt.levels[nearest_level_index(y[0], fmt)];
    const double dy = fmt.levels[nearest_level_index(y[2], fmt)];
    const double target[4] = {dx, 0.0, dy, 0.0};

    double mse = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double e = target[i] - y[i];
      mse += e * e;
      for (int j = 0; j < 4; ++j)
        for (int t = 0; t < taps; ++t)
          h[i][j][t] += cfg.mu * e * streams[j][(k + n + center - t) % n];
      out[i][k] = y[i];
    }
    run_mse += mse;
    if (++window_count == mse_window) {
      run_mse /= static_cast<double>(mse_window);
      if (start_mse < 0.0) start_mse = run_mse;
      if (start_mse > 0.0 && run_mse > 10.0 * start_mse)
        throw std::runtime_error("dd_equalize_4x4: diverging");
      run_mse = 0.0;
      window_count = 0;
    }
  }
  return out;
}

std::vector<int> decide_inphase(const cvec& symbols, const ModFormat& fmt) {
  std::vector<int> bits;
  bits.reserve(symbols.size() * fmt.bits_per_symbol);
  for (const auto& s : symbols) {
    const int gray = fmt.index_to_gray[nearest_level_index(s.real(), fmt)];
    for (int b = fmt.bits_per_symbol - 1; b >= 0; --b)
      bits.push_back((gray >> b) & 1);
  }
  return bits;
}

BerCount count_ber(const std::vector<int>& decided,
                   const std::vector<int>& reference) {
  if (decided.size() != reference.size())
    throw std::invalid_argument("count_ber: length mismatch");
  BerCount c;
  c.total = decided.size();
  for (std::size_t i = 0; i < decided.size(); ++i)
    if ((decided[i] & 1) != (reference[i] & 1)) ++c.errors;
  return c;
}

double ber_to_q2(double ber) {
  if (!(ber > 0.0 && ber < 0.5))
    throw std::domain_error("ber_to_q2: BER outside (0, 0.5)");
  return 20.0 * std::log10(std::sqrt(2.0) * erfc_inv(2.0 * ber));
}

}  // namespace olink
