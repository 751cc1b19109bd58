#include "chainlab/operator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "chainlab/errors.hpp"

namespace chainlab {

namespace {

Vec normalized_weights(const Vec& raw) {
  long double z = 0.0L;
  for (int i = 0; i < raw.size(); ++i) z += static_cast<long double>(raw[i]);
  Vec w(raw.size());
  for (int i = 0; i < raw.size(); ++i)
    w[i] = static_cast<double>(static_cast<long double>(raw[i]) / z);
  long double z2 = 0.0L;
  for (int i = 0; i < w.size(); ++i) z2 += static_cast<long double>(w[i]);
  for (int i = 0; i < w.size(); ++i)
    w[i] = static_cast<double>(static_cast<long double>(w[i]) / z2);
  return w;
}

Vec volume_weights(const DiscreteSpace& space) { return normalized_weights(space.volume); }

void clamp_tiny(Mat& P) {
  for (int j = 0; j < P.cols(); ++j)
    for (int i = 0; i < P.rows(); ++i) {
      double& e = P(i, j);
      if (e < -1e-15) throw NumericError("transition matrix entry is negative beyond tolerance");
      if (std::abs(e) <= 1e-15) e = 0.0;
    }
}

// Adds the rank-one conditional-expectation block for one chord:
// P(i, j) += (pi_j / chord mass) * inv_blocks for all i, j in the chord.
void accumulate_projection(Mat& P, const std::vector<int>& chord, const Vec& pi,
                           double inv_blocks) {
  long double mass = 0.0L;
  for (int j : chord) mass += static_cast<long double>(pi[j]);
  for (int j : chord) {
    const double w =
        static_cast<double>(static_cast<long double>(pi[j]) / mass) * inv_blocks;
    for (int i : chord) P(i, j) += w;
  }
}

struct GridPartition {
  std::vector<std::vector<int>> chords;  // chord id -> cell ids (ascending)
  std::vector<int> chord_of;             // cell id -> chord id
};

// Groups kept cells by the lattice line through them with step `v`:
// the representative is the line's entry point into the grid bounds.
GridPartition partition_by_step(const DiscreteSpace& space, const std::vector<int>& v) {
  const int d = static_cast<int>(space.resolution.size());
  std::vector<long> stride(d);
  long acc = 1;
  for (int t = 0; t < d; ++t) {
    stride[t] = acc;
    acc *= space.resolution[t];
  }
  GridPartition part;
  part.chord_of.resize(space.n());
  std::unordered_map<long, int> chord_id;
  for (int c = 0; c < space.n(); ++c) {
    const std::vector<int>& coord = space.coords[c];
    long k_max = std::numeric_limits<long>::max();
    for (int t = 0; t < d; ++t) {
      if (v[t] > 0)
        k_max = std::min<long>(k_max, coord[t] / v[t]);
      else if (v[t] < 0)
        k_max = std::min<long>(k_max, (space.resolution[t] - 1 - coord[t]) / (-v[t]));
    }
    long key = 0;
    for (int t = 0; t < d; ++t) key += (coord[t] - k_max * v[t]) * stride[t];
    auto [it, fresh] = chord_id.try_emplace(key, static_cast<int>(part.chords.size()));
    if (fresh) part.chords.emplace_back();
    part.chords[it->second].push_back(c);
    part.chord_of[c] = it->second;
  }
  return part;
}

std::vector<std::vector<int>> axis_steps(int d) {
  std::vector<std::vector<int>> steps(d, std::vector<int>(d, 0));
  for (int a = 0; a < d; ++a) steps[a][a] = 1;
  return steps;
}

void validate_direction_set(const std::vector<std::vector<int>>& dirs, int d) {
  if (dirs.empty()) throw std::invalid_argument("direction set must be non-empty");
  std::vector<std::vector<int>> seen;
  for (const auto& v : dirs) {
    if (static_cast<int>(v.size()) != d)
      throw DimensionError("direction length does not match grid dimension");
    int g = 0;
    for (int c : v) g = std::gcd(g, std::abs(c));
    if (g == 0) throw std::invalid_argument("direction must be non-zero");
    if (g != 1)
      throw std::invalid_argument("direction components must be coprime to trace lattice lines");
    // canonicalize sign: a step and its negation trace the same lines
    std::vector<int> canon = v;
    for (int c : canon) {
      if (c > 0) break;
      if (c < 0) {
        for (int& e : canon) e = -e;
        break;
      }
    }
    if (std::find(seen.begin(), seen.end(), canon) != seen.end())
      throw std::invalid_argument("duplicate direction in direction set");
    seen.push_back(std::move(canon));
  }
}

// Distinct density levels ascending, band widths, level-set volumes, and
// each cell's level index (1-based; level_of[i] = number of levels <= rho_i).
struct Bands {
  std::vector<double> levels;
  std::vector<double> widths;
  std::vector<long double> level_volume;  // V_l, 1-based at index l-1
  std::vector<int> level_of;
  long double z = 0.0L;  // sum rho_i vol_i
};

Bands band_structure(const DiscreteSpace& space) {
  Bands b;
  b.levels.assign(space.rho.data(), space.rho.data() + space.n());
  std::sort(b.levels.begin(), b.levels.end());
  b.levels.erase(std::unique(b.levels.begin(), b.levels.end()), b.levels.end());
  const int m = static_cast<int>(b.levels.size());
  b.widths.resize(m);
  for (int l = 0; l < m; ++l) b.widths[l] = b.levels[l] - (l == 0 ? 0.0 : b.levels[l - 1]);
  b.level_of.resize(space.n());
  std::vector<long double> mass_at(m, 0.0L);
  for (int i = 0; i < space.n(); ++i) {
    const int l = static_cast<int>(std::lower_bound(b.levels.begin(), b.levels.end(),
                                                    space.rho[i]) -
                                   b.levels.begin());
    b.level_of[i] = l + 1;
    mass_at[l] += static_cast<long double>(space.volume[i]);
    b.z += static_cast<long double>(space.rho[i]) * static_cast<long double>(space.volume[i]);
  }
  b.level_volume.resize(m);
  long double suffix = 0.0L;
  for (int l = m - 1; l >= 0; --l) {
    suffix += mass_at[l];
    b.level_volume[l] = suffix;
  }
  return b;
}

void require_proposal_shape(const DiscreteSpace& space, const Mat& B) {
  if (B.rows() != space.n() || B.cols() != space.n())
    throw DimensionError("proposal matrix size does not match the space");
  for (int i = 0; i < B.rows(); ++i) {
    long double s = 0.0L;
    for (int j = 0; j < B.cols(); ++j) {
      if (B(i, j) < -1e-15)
        throw std::invalid_argument("proposal matrix has a negative entry");
      s += static_cast<long double>(B(i, j));
    }
    if (std::abs(static_cast<double>(s - 1.0L)) > 1e-12)
      throw std::invalid_argument("proposal matrix rows must sum to 1");
  }
}

void require_volume_reversible(const DiscreteSpace& space, const TransitionMatrix& B) {
  require_proposal_shape(space, B.P);
  const Vec u = volume_weights(space);
  double worst = 0.0;
  for (int i = 0; i < space.n(); ++i)
    for (int j = i + 1; j < space.n(); ++j)
      worst = std::max(worst, std::abs(u[i] * B.P(i, j) - u[j] * B.P(j, i)));
  if (worst > 1e-12)
    throw std::invalid_argument("proposal kernel is not reversible against volume weights");
}

}  // namespace

DiscreteSpace make_space(Vec volume, Vec rho) {
  if (volume.size() != rho.size() || volume.size() == 0)
    throw DimensionError("volume and rho must be non-empty and of equal length");
  for (int i = 0; i < rho.size(); ++i) {
    if (!(volume[i] > 0.0) || !std::isfinite(volume[i]))
      throw std::invalid_argument("cell volumes must be positive and finite");
    if (!(rho[i] > 0.0) || !std::isfinite(rho[i]))
      throw std::invalid_argument("cell densities must be positive and finite");
  }
  DiscreteSpace space;
  space.volume = std::move(volume);
  space.rho = std::move(rho);
  Vec raw(space.n());
  for (int i = 0; i < space.n(); ++i) raw[i] = space.rho[i] * space.volume[i];
  space.pi = normalized_weights(raw);
  return space;
}

DiscreteSpace grid_space(const ConvexBody& body, const Density& density,
                         const std::vector<int>& resolution) {
  const int d = body.dim();
  if (static_cast<int>(resolution.size()) != d)
    throw DimensionError("resolution length does not match body dimension");
  long total = 1;
  for (int r : resolution) {
    if (r < 1) throw std::invalid_argument("resolution entries must be at least 1");
    total *= r;
    if (total > (1L << 22)) throw BudgetError("grid has too many cells");
  }

  const AxisBox& bb = body.bounding_box();
  Vec width(d);
  double cell_vol = 1.0;
  for (int t = 0; t < d; ++t) {
    width[t] = (bb.upper[t] - bb.lower[t]) / resolution[t];
    cell_vol *= width[t];
  }

  DiscreteSpace space;
  space.resolution = resolution;
  std::vector<double> vol_list, rho_list;
  std::vector<int> idx(d, 0);
  Vec center(d);
  for (long cell = 0; cell < total; ++cell) {
    for (int t = 0; t < d; ++t) center[t] = bb.lower[t] + (idx[t] + 0.5) * width[t];
    if (body.contains(center)) {
      const double r = density(center);
      if (r > 0.0) {
        space.coords.push_back(idx);
        space.centers.push_back(center);
        vol_list.push_back(cell_vol);
        rho_list.push_back(r);
      }
    }
    for (int t = 0; t < d; ++t) {
      if (++idx[t] < resolution[t]) break;
      idx[t] = 0;
    }
  }
  if (rho_list.empty())
    throw std::domain_error("every grid cell is outside the body or has zero density");

  space.volume = Eigen::Map<Vec>(vol_list.data(), static_cast<long>(vol_list.size()));
  space.rho = Eigen::Map<Vec>(rho_list.data(), static_cast<long>(rho_list.size()));
  Vec raw(space.n());
  for (int i = 0; i < space.n(); ++i) raw[i] = space.rho[i] * space.volume[i];
  space.pi = normalized_weights(raw);
  return space;
}

Vec OperatorFactorization::mu() const {
  Vec out(pairs());
  const int n = cells();
  for (int b = 0; b < num_blocks; ++b)
    for (int i = 0; i < n; ++i) out[b * n + i] = pi[i] / num_blocks;
  return out;
}

Mat OperatorFactorization::M_hat() const {
  if (pairs() > 8192) throw BudgetError("auxiliary space too large to materialize densely");
  Mat M = Mat::Zero(cells(), pairs());
  for (int b = 0; b < num_blocks; ++b)
    for (int i = 0; i < cells(); ++i) M(i, b * cells() + i) = 1.0 / num_blocks;
  return M;
}

Mat OperatorFactorization::M_star() const {
  if (pairs() > 8192) throw BudgetError("auxiliary space too large to materialize densely");
  Mat L = Mat::Zero(pairs(), cells());
  for (int b = 0; b < num_blocks; ++b)
    for (int i = 0; i < cells(); ++i) L(b * cells() + i, i) = 1.0;
  return L;
}

Mat OperatorFactorization::T_hat() const {
  if (pairs() > 8192) throw BudgetError("auxiliary space too large to materialize densely");
  Mat T = Mat::Zero(pairs(), pairs());
  const int n = cells();
  for (int b = 0; b < num_blocks; ++b)
    for (const auto& chord : chords[b]) {
      long double mass = 0.0L;
      for (int j : chord) mass += static_cast<long double>(pi[j]);
      for (int j : chord) {
        const double w = static_cast<double>(static_cast<long double>(pi[j]) / mass);
        for (int i : chord) T(b * n + i, b * n + j) = w;
      }
    }
  return T;
}

Vec OperatorFactorization::apply_M(const Vec& g) const {
  if (g.size() != pairs()) throw DimensionError("pair-space vector has the wrong length");
  const int n = cells();
  Vec f = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    long double s = 0.0L;
    for (int b = 0; b < num_blocks; ++b) s += static_cast<long double>(g[b * n + i]);
    f[i] = static_cast<double>(s / num_blocks);
  }
  return f;
}

Vec OperatorFactorization::apply_M_star(const Vec& f) const {
  if (f.size() != cells()) throw DimensionError("cell-space vector has the wrong length");
  const int n = cells();
  Vec g(pairs());
  for (int b = 0; b < num_blocks; ++b)
    for (int i = 0; i < n; ++i) g[b * n + i] = f[i];
  return g;
}

Vec OperatorFactorization::apply_T(const Vec& g) const {
  if (g.size() != pairs()) throw DimensionError("pair-space vector has the wrong length");
  const int n = cells();
  Vec out(pairs());
  for (int b = 0; b < num_blocks; ++b)
    for (const auto& chord : chords[b]) {
      long double mass = 0.0L;
      long double acc = 0.0L;
      for (int j : chord) {
        mass += static_cast<long double>(pi[j]);
        acc += static_cast<long double>(pi[j]) * static_cast<long double>(g[b * n + j]);
      }
      const double avg = static_cast<double>(acc / mass);
      for (int i : chord) out[b * n + i] = avg;
    }
  return out;
}

std::pair<TransitionMatrix, OperatorFactorization> build_hit_and_run_matrix(
    const DiscreteSpace& space, const std::vector<std::vector<int>>& direction_set) {
  if (!space.is_grid())
    throw std::invalid_argument("chord kernels need a grid space");
  const int d = static_cast<int>(space.resolution.size());
  validate_direction_set(direction_set, d);

  const int nb = static_cast<int>(direction_set.size());
  OperatorFactorization fact;
  fact.num_blocks = nb;
  fact.pi = space.pi;

  Mat P = Mat::Zero(space.n(), space.n());
  for (const auto& v : direction_set) {
    GridPartition part = partition_by_step(space, v);
    for (const auto& chord : part.chords)
      accumulate_projection(P, chord, space.pi, 1.0 / nb);
    fact.chords.push_back(std::move(part.chords));
  }
  clamp_tiny(P);
  return {TransitionMatrix{std::move(P), space.pi}, std::move(fact)};
}

std::pair<TransitionMatrix, OperatorFactorization> build_gibbs_matrix(const DiscreteSpace& space) {
  if (!space.is_grid()) throw std::invalid_argument("the Gibbs kernel needs a grid space");
  return build_hit_and_run_matrix(space, axis_steps(static_cast<int>(space.resolution.size())));
}

TransitionMatrix build_slice_matrix(const DiscreteSpace& space) {
  const Bands bands = band_structure(space);
  const int m = static_cast<int>(bands.levels.size());
  // prefix[l] = sum_{k <= l} width_k / V_k  (1-based; prefix[0] = 0)
  std::vector<long double> prefix(m + 1, 0.0L);
  for (int l = 1; l <= m; ++l)
    prefix[l] = prefix[l - 1] +
                static_cast<long double>(bands.widths[l - 1]) / bands.level_volume[l - 1];

  Mat P(space.n(), space.n());
  for (int j = 0; j < space.n(); ++j) {
    const long double vol_j = static_cast<long double>(space.volume[j]);
    for (int i = 0; i < space.n(); ++i) {
      const int l = std::min(bands.level_of[i], bands.level_of[j]);
      P(i, j) = static_cast<double>(vol_j * prefix[l] /
                                    static_cast<long double>(space.rho[i]));
    }
  }
  clamp_tiny(P);
  return TransitionMatrix{std::move(P), space.pi};
}

TransitionMatrix build_metropolis_matrix(const DiscreteSpace& space, const TransitionMatrix& B) {
  require_volume_reversible(space, B);
  Mat P(space.n(), space.n());
  for (int i = 0; i < space.n(); ++i) {
    long double off = 0.0L;
    for (int j = 0; j < space.n(); ++j) {
      if (j == i) continue;
      const double alpha = std::min(1.0, space.rho[j] / space.rho[i]);
      P(i, j) = B.P(i, j) * alpha;
      off += static_cast<long double>(P(i, j));
    }
    P(i, i) = static_cast<double>(1.0L - off);
  }
  clamp_tiny(P);
  return TransitionMatrix{std::move(P), space.pi};
}

TransitionMatrix build_metropolis_via_slice(const DiscreteSpace& space,
                                            const TransitionMatrix& B) {
  require_volume_reversible(space, B);
  const Bands bands = band_structure(space);
  const int m = static_cast<int>(bands.levels.size());
  // W[l] = sum_{k <= l} width_k: total band width below level l (1-based).
  std::vector<long double> W(m + 1, 0.0L);
  for (int l = 1; l <= m; ++l) W[l] = W[l - 1] + static_cast<long double>(bands.widths[l - 1]);

  Mat P(space.n(), space.n());
  for (int i = 0; i < space.n(); ++i) {
    const long double rho_i = static_cast<long double>(space.rho[i]);
    const int li = bands.level_of[i];
    long double cross = 0.0L;  // sum_j B_ij * W[min(L_i, L_j)]
    for (int j = 0; j < space.n(); ++j) {
      const long double band_mass =
          static_cast<long double>(B.P(i, j)) * W[std::min(li, bands.level_of[j])];
      cross += band_mass;
      if (j != i) P(i, j) = static_cast<double>(band_mass / rho_i);
    }
    P(i, i) = static_cast<double>(
        ((1.0L + static_cast<long double>(B.P(i, i))) * W[li] - cross) / rho_i);
  }
  clamp_tiny(P);
  return TransitionMatrix{std::move(P), space.pi};
}

TransitionMatrix proposal_independent_uniform(const DiscreteSpace& space) {
  const Vec u = volume_weights(space);
  Mat B(space.n(), space.n());
  for (int j = 0; j < space.n(); ++j) B.col(j).setConstant(u[j]);
  return TransitionMatrix{std::move(B), u};
}

TransitionMatrix proposal_lazy_ball_walk(const DiscreteSpace& space, int radius) {
  if (radius < 1) throw std::invalid_argument("ball-walk radius must be at least 1");
  const int n = space.n();
  std::vector<std::vector<int>> neighbors(n);
  if (space.is_grid()) {
    const int d = static_cast<int>(space.resolution.size());
    std::vector<long> stride(d);
    long acc = 1;
    for (int t = 0; t < d; ++t) {
      stride[t] = acc;
      acc *= space.resolution[t];
    }
    std::unordered_map<long, int> id_of;
    for (int c = 0; c < n; ++c) {
      long key = 0;
      for (int t = 0; t < d; ++t) key += space.coords[c][t] * stride[t];
      id_of[key] = c;
    }
    std::vector<int> off(d, -radius);
    for (int c = 0; c < n; ++c) {
      std::fill(off.begin(), off.end(), -radius);
      while (true) {
        bool self = true;
        long key = 0;
        bool inside = true;
        for (int t = 0; t < d; ++t) {
          const int q = space.coords[c][t] + off[t];
          if (off[t] != 0) self = false;
          if (q < 0 || q >= space.resolution[t]) {
            inside = false;
            break;
          }
          key += q * stride[t];
        }
        if (inside && !self) {
          auto it = id_of.find(key);
          if (it != id_of.end()) neighbors[c].push_back(it->second);
        }
        int t = 0;
        for (; t < d; ++t) {
          if (++off[t] <= radius) break;
          off[t] = -radius;
        }
        if (t == d) break;
      }
    }
  } else {
    for (int c = 0; c < n; ++c)
      for (int j = std::max(0, c - radius); j <= std::min(n - 1, c + radius); ++j)
        if (j != c) neighbors[c].push_back(j);
  }

  // Symmetric conductances min(vol_i, vol_j) make the walk volume-reversible;
  // one global scale keeps rows substochastic, the remainder sits on the
  // diagonal, and the final lazification forces a non-negative spectrum.
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : neighbors[i]) s += std::min(space.volume[i], space.volume[j]);
    scale = std::max(scale, s / space.volume[i]);
  }
  Mat B = Mat::Zero(n, n);
  if (scale == 0.0) {
    B.setIdentity();
  } else {
    for (int i = 0; i < n; ++i) {
      long double off_mass = 0.0L;
      for (int j : neighbors[i]) {
        B(i, j) = std::min(space.volume[i], space.volume[j]) / (space.volume[i] * scale) * 0.5;
        off_mass += static_cast<long double>(B(i, j));
      }
      B(i, i) = static_cast<double>(1.0L - off_mass);
    }
  }
  clamp_tiny(B);
  return TransitionMatrix{std::move(B), volume_weights(space)};
}

TransitionMatrix proposal_swap(const DiscreteSpace& space) {
  if (space.n() != 2) throw std::invalid_argument("the swap proposal needs exactly two cells");
  if (std::abs(space.volume[0] - space.volume[1]) >
      1e-12 * (space.volume[0] + space.volume[1]))
    throw std::invalid_argument("the swap proposal needs equal cell volumes");
  Mat B(2, 2);
  B << 0.0, 1.0, 1.0, 0.0;
  return TransitionMatrix{std::move(B), volume_weights(space)};
}

TransitionMatrix proposal_from_matrix(const DiscreteSpace& space, Mat B) {
  TransitionMatrix prop{std::move(B), volume_weights(space)};
  require_volume_reversible(space, prop);
  clamp_tiny(prop.P);
  return prop;
}

TransitionMatrix lazy_kernel(const TransitionMatrix& P) {
  Mat L = 0.5 * P.P;
  L.diagonal().array() += 0.5;
  return TransitionMatrix{std::move(L), P.weights};
}

FactorizationReport verify_factorization(const TransitionMatrix& P,
                                         const OperatorFactorization& F, int trials) {
  const int n = F.cells();
  const int nb = F.num_blocks;
  if (P.n() != n) throw DimensionError("factorization does not match the matrix size");
  FactorizationReport report;

  // cell -> chord lookup per block
  std::vector<std::vector<int>> chord_of(nb, std::vector<int>(n, -1));
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < static_cast<int>(F.chords[b].size()); ++c)
      for (int i : F.chords[b][c]) chord_of[b][i] = c;

  // reconstruction: column j of M T M* assembled from the chord structure
  Vec col(n);
  for (int j = 0; j < n; ++j) {
    col.setZero();
    for (int b = 0; b < nb; ++b) {
      const auto& chord = F.chords[b][chord_of[b][j]];
      long double mass = 0.0L;
      for (int l : chord) mass += static_cast<long double>(F.pi[l]);
      const double w = static_cast<double>(static_cast<long double>(F.pi[j]) / mass / nb);
      for (int i : chord) col[i] += w;
    }
    report.reconstruction =
        std::max(report.reconstruction, (col - P.P.col(j)).cwiseAbs().maxCoeff());
  }

  // idempotency and mu-self-adjointness, chord by chord (T is block diagonal)
  for (int b = 0; b < nb; ++b)
    for (const auto& chord : F.chords[b]) {
      long double mass = 0.0L;
      for (int j : chord) mass += static_cast<long double>(F.pi[j]);
      std::vector<double> t(chord.size());
      double row_sum = 0.0;
      for (std::size_t a = 0; a < chord.size(); ++a) {
        t[a] = static_cast<double>(static_cast<long double>(F.pi[chord[a]]) / mass);
        row_sum += t[a];
      }
      for (std::size_t a = 0; a < chord.size(); ++a) {
        report.idempotency =
            std::max(report.idempotency, std::abs(t[a] * (row_sum - 1.0)));
        const double mu_a = F.pi[chord[a]] / nb;
        for (std::size_t c = a + 1; c < chord.size(); ++c) {
          const double mu_c = F.pi[chord[c]] / nb;
          report.self_adjointness =
              std::max(report.self_adjointness, std::abs(mu_a * t[c] - mu_c * t[a]));
        }
      }
    }

  // adjoint identity <f, M g>_pi = <M* f, g>_mu on random vectors
  Rng rng(0x5eedf00dULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Vec mu = F.mu();
  Vec f(n), g(F.pairs());
  for (int trial = 0; trial < trials; ++trial) {
    for (int i = 0; i < n; ++i) f[i] = unif(rng);
    for (int p = 0; p < F.pairs(); ++p) g[p] = unif(rng);
    const Vec Mg = F.apply_M(g);
    long double lhs = 0.0L;
    for (int i = 0; i < n; ++i)
      lhs += static_cast<long double>(F.pi[i]) * static_cast<long double>(f[i]) *
             static_cast<long double>(Mg[i]);
    const Vec lift = F.apply_M_star(f);
    long double rhs = 0.0L;
    for (int p = 0; p < F.pairs(); ++p)
      rhs += static_cast<long double>(mu[p]) * static_cast<long double>(lift[p]) *
             static_cast<long double>(g[p]);
    report.adjoint_identity =
        std::max(report.adjoint_identity, std::abs(static_cast<double>(lhs - rhs)));
  }
  return report;
}

double check_detailed_balance(const TransitionMatrix& P) {
  double worst = 0.0;
  for (int i = 0; i < P.n(); ++i)
    for (int j = i + 1; j < P.n(); ++j)
      worst = std::max(worst,
                       std::abs(P.weights[i] * P.P(i, j) - P.weights[j] * P.P(j, i)));
  return worst;
}

double row_sum_error(const TransitionMatrix& P) {
  double worst = 0.0;
  for (int i = 0; i < P.n(); ++i) {
    long double s = 0.0L;
    for (int j = 0; j < P.n(); ++j) s += static_cast<long double>(P.P(i, j));
    worst = std::max(worst, std::abs(static_cast<double>(s - 1.0L)));
  }
  return worst;
}

double stationarity_error(const TransitionMatrix& P) {
  double worst = 0.0;
  for (int j = 0; j < P.n(); ++j) {
    long double s = 0.0L;
    for (int i = 0; i < P.n(); ++i)
      s += static_cast<long double>(P.weights[i]) * static_cast<long double>(P.P(i, j));
    worst = std::max(worst, std::abs(static_cast<double>(s) - P.weights[j]));
  }
  return worst;
}

namespace {

// Auxiliary pair layout for the level decomposition: (cell i, band l) for
// every band l = 1..L_i, flattened cell-major.
struct LevelPairs {
  Bands bands;
  std::vector<int> offset;           // pair index of (i, 1)
  std::vector<std::vector<int>> at;  // at[l-1]: cells with L_i >= l
  int total = 0;
};

LevelPairs level_pairs(const DiscreteSpace& space) {
  LevelPairs lp;
  lp.bands = band_structure(space);
  lp.offset.resize(space.n());
  for (int i = 0; i < space.n(); ++i) {
    lp.offset[i] = lp.total;
    lp.total += lp.bands.level_of[i];
  }
  lp.at.resize(lp.bands.levels.size());
  for (int i = 0; i < space.n(); ++i)
    for (int l = 1; l <= lp.bands.level_of[i]; ++l) lp.at[l - 1].push_back(i);
  return lp;
}

// (R_l g_l)_i where R_l resamples volume-uniformly within the level set.
// `forward` selects the iteration order so the two evaluation routes do not
// share their accumulation pattern.
double uniform_level_apply(const LevelPairs& lp, const DiscreteSpace& space, const Vec& g,
                           int l, bool forward) {
  const auto& cells = lp.at[l - 1];
  const long double v_l = lp.bands.level_volume[l - 1];
  long double acc = 0.0L;
  if (forward) {
    for (int j : cells)
      acc += static_cast<long double>(space.volume[j]) *
             static_cast<long double>(g[lp.offset[j] + l - 1]);
    return static_cast<double>(acc / v_l);
  }
  for (auto it = cells.rbegin(); it != cells.rend(); ++it)
    acc += static_cast<long double>(g[lp.offset[*it] + l - 1]) *
           static_cast<long double>(space.volume[*it] / static_cast<double>(v_l));
  return static_cast<double>(acc);
}

// (R_l g_l)_i for the proposal-induced kernel: move via B within the level
// set, stay put on the mass B sends outside it.
double induced_level_apply(const LevelPairs& lp, const Mat& B,
                           const Vec& g, int l, int i) {
  const auto& cells = lp.at[l - 1];
  long double acc = 0.0L;
  long double inside = 0.0L;
  for (int j : cells) {
    const long double bij = static_cast<long double>(B(i, j));
    inside += bij;
    acc += bij * static_cast<long double>(g[lp.offset[j] + l - 1]);
  }
  acc += (1.0L - inside) * static_cast<long double>(g[lp.offset[i] + l - 1]);
  return static_cast<double>(acc);
}

double level_check_impl(const DiscreteSpace& space, const Mat* B, int trials, Rng& rng) {
  const LevelPairs lp = level_pairs(space);
  const int m = static_cast<int>(lp.bands.levels.size());
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec g(lp.total);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    for (int p = 0; p < lp.total; ++p) g[p] = unif(rng);

    // Route A: <T g, g>_mu with mu_(i,l) = vol_i * width_l / Z, iterating
    // pair by pair over the auxiliary space.
    long double route_a = 0.0L;
    for (int i = 0; i < space.n(); ++i)
      for (int l = 1; l <= lp.bands.level_of[i]; ++l) {
        const double tg = B ? induced_level_apply(lp, *B, g, l, i)
                            : uniform_level_apply(lp, space, g, l, true);
        const long double mu =
            static_cast<long double>(space.volume[i]) *
            static_cast<long double>(lp.bands.widths[l - 1]) / lp.bands.z;
        route_a += mu * static_cast<long double>(tg) *
                   static_cast<long double>(g[lp.offset[i] + l - 1]);
      }

    // Route B: band-weighted per-band quadratic forms,
    // sum_l width_l * (V_l / Z) * <R_l g_l, g_l> under the level-uniform law.
    long double route_b = 0.0L;
    for (int l = 1; l <= m; ++l) {
      const long double v_l = lp.bands.level_volume[l - 1];
      long double quad = 0.0L;
      for (int i : lp.at[l - 1]) {
        const double rg = B ? induced_level_apply(lp, *B, g, l, i)
                            : uniform_level_apply(lp, space, g, l, false);
        quad += static_cast<long double>(space.volume[i] / static_cast<double>(v_l)) *
                static_cast<long double>(rg) *
                static_cast<long double>(g[lp.offset[i] + l - 1]);
      }
      route_b += static_cast<long double>(lp.bands.widths[l - 1]) * (v_l / lp.bands.z) * quad;
    }
    worst = std::max(worst, std::abs(static_cast<double>(route_a - route_b)));
  }
  return worst;
}

}  // namespace

double level_decomposition_check(const DiscreteSpace& space, int trials, Rng& rng) {
  return level_check_impl(space, nullptr, trials, rng);
}

double level_decomposition_check(const DiscreteSpace& space, const TransitionMatrix& B,
                                 int trials, Rng& rng) {
  require_volume_reversible(space, B);
  return level_check_impl(space, &B.P, trials, rng);
}

std::vector<int> simulate_discrete_chain(const TransitionMatrix& P, int start,
                                         std::int64_t steps, Rng& rng) {
  if (start < 0 || start >= P.n()) throw std::invalid_argument("start cell out of range");
  if (steps < 0) throw std::invalid_argument("step count must be non-negative");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(start);
  int state = start;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double u = unit(rng);
    double acc = 0.0;
    int next = P.n() - 1;
    for (int j = 0; j < P.n(); ++j) {
      acc += P.P(state, j);
      if (u < acc) {
        next = j;
        break;
      }
    }
    state = next;
    path.push_back(state);
  }
  return path;
}

}  // namespace chainlab
