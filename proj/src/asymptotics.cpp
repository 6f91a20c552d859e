// Copyright (C) 2026 The spikelab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spikelab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "spikelab/errors.hpp"
#include "spikelab/io.hpp"
#include "spikelab/mp_law.hpp"

namespace spikelab {

namespace {

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

bool same_strength(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

void check_unit(const Eigen::VectorXd& w, int M, const Tolerances& tol) {
  if (w.size() != M) throw ConfigError("probe vector has the wrong length");
  if (std::abs(w.norm() - 1.0) > tol.unit_norm) throw ConfigError("probe vector is not a unit vector");
}

void check_index_set(const SpikeSet& s, const std::vector<int>& I) {
  if (I.empty()) throw ConfigError("empty index set");
  for (std::size_t a = 0; a < I.size(); ++a) {
    if (I[a] < 0 || I[a] >= s.rank()) throw ConfigError("spike index out of range");
    for (std::size_t b = 0; b < a; ++b) {
      if (I[a] == I[b]) throw ConfigError("repeated spike index");
    }
  }
}

double group_strength(const SpikeSet& s, const std::vector<int>& I) {
  const double d = s.d[I.front()];
  for (int t : I) {
    if (!same_strength(s.d[t], d)) throw ConfigError("indices of a multiplicity group must share one strength");
  }
  return d;
}

void require_known(const SpikeSet& s, int j, const char* why) {
  if (!s.is_known(j)) {
    std::ostringstream os;
    os << "direction of spike " << j + 1 << " is required " << why;
    throw ConfigError(os.str());
  }
}

// A covariance coordinate of the form coef * (p o q), the entrywise product,
// as it enters the kappa4 correction.
struct ProductCoord {
  double coef;
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};

// Gram matrix of the scaled entrywise products; entry (a, b) equals
// coef_a coef_b s_{1,1,1,1}(p_a, q_a, p_b, q_b).
Eigen::MatrixXd product_gram(const std::vector<ProductCoord>& coords, int M) {
  Eigen::MatrixXd F(static_cast<Eigen::Index>(coords.size()), M);
  for (std::size_t a = 0; a < coords.size(); ++a) {
    F.row(a) = coords[a].coef * coords[a].p.cwiseProduct(coords[a].q).transpose();
  }
  return F * F.transpose();
}

std::string label(const char* name, int one_based) { return std::string(name) + "_" + std::to_string(one_based); }

// Coordinates shared by A, B and C for a group I and probe w.
struct GroupLayout {
  double d = 0.0;
  AuxFunctions aux{};
  Eigen::VectorXd wI;
  double wI_norm2 = 0.0;
  VarsigmaVector vs;
  std::vector<int> complement;
  std::vector<std::string> labels;
  Eigen::MatrixXd A;
  std::vector<ProductCoord> products;
};

GroupLayout layout_group(const SpikeSet& s, const std::vector<int>& I, const Eigen::VectorXd& w, double y,
                         const Tolerances& tol) {
  s.validate();
  check_index_set(s, I);
  check_unit(w, s.M(), tol);
  for (int j = 0; j < s.rank(); ++j) require_known(s, j, "for the generalized-component covariance");

  GroupLayout L;
  L.d = group_strength(s, I);
  L.aux = aux_funcs(L.d, y, tol);
  std::vector<int> sorted_I = I;
  std::sort(sorted_I.begin(), sorted_I.end());
  L.wI = Eigen::VectorXd::Zero(s.M());
  for (int t : sorted_I) L.wI += s.v.col(t).dot(w) * s.v.col(t);
  L.wI_norm2 = L.wI.squaredNorm();
  L.vs = varsigma(s, sorted_I, w, {}, tol);
  for (int j = 0; j < s.rank(); ++j) {
    if (!contains(sorted_I, j)) L.complement.push_back(j);
  }

  const int nI = static_cast<int>(sorted_I.size());
  const int n = 2 + nI + static_cast<int>(L.complement.size());
  L.labels = {"Theta", "Lambda"};
  for (int t : sorted_I) L.labels.push_back(label("Delta", t + 1));
  for (int j : L.complement) L.labels.push_back(label("Pi", j + 1));

  const auto [f, g, h, l] = L.aux;
  const double sh = std::sqrt(h);
  const double w2 = L.wI_norm2;
  const Eigen::VectorXd& z0 = L.vs.normalized;

  Eigen::MatrixXd& A = L.A;
  A = Eigen::MatrixXd::Zero(n, n);
  A(0, 0) = 2.0 * y * h * h * (1.0 + y * h * h) * w2 * w2;
  A(1, 1) = g * g * w2;
  for (int a = 0; a < nI; ++a) {
    const double wt = L.wI.dot(s.v.col(sorted_I[a]));
    A(2 + a, 2 + a) = h;
    A(1, 2 + a) = A(2 + a, 1) = g * sh * wt;
  }
  for (std::size_t b = 0; b < L.complement.size(); ++b) {
    const int k = 2 + nI + static_cast<int>(b);
    const double zj = z0.dot(s.v.col(L.complement[b]));
    A(k, k) = l * l * w2;
    A(1, k) = A(k, 1) = g * l * zj * w2;
    for (int a = 0; a < nI; ++a) {
      const double wt = L.wI.dot(s.v.col(sorted_I[a]));
      A(2 + a, k) = A(k, 2 + a) = sh * l * wt * zj;
    }
  }

  L.products.push_back({f, L.wI, L.wI});
  L.products.push_back({g, z0, L.wI});
  for (int t : sorted_I) L.products.push_back({sh, Eigen::VectorXd(s.v.col(t)), z0});
  for (int j : L.complement) L.products.push_back({l, Eigen::VectorXd(s.v.col(j)), L.wI});
  return L;
}

}  // namespace

double moment_sum(const std::vector<int>& pattern, const std::vector<Eigen::VectorXd>& vectors) {
  if (pattern.size() != vectors.size()) throw ConfigError("moment sum: pattern and vector counts differ");
  if (vectors.empty()) return 0.0;
  const Eigen::Index M = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != M) throw ConfigError("moment sum: vectors differ in length");
  }
  for (int k : pattern) {
    if (k < 0) throw ConfigError("moment sum: negative exponent");
  }
  Eigen::ArrayXd prod = Eigen::ArrayXd::Ones(M);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    for (int k = 0; k < pattern[i]; ++k) prod *= vectors[i].array();
  }
  return prod.sum();
}

double s4(const Eigen::VectorXd& a) { return moment_sum({4}, {a}); }
double s13(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return moment_sum({1, 3}, {a, b}); }
double s22(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return moment_sum({2, 2}, {a, b}); }
double s112(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  return moment_sum({1, 1, 2}, {a, b, c});
}
double s1111(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
  return moment_sum({1, 1, 1, 1}, {a, b, c, d});
}

SpikeSet SpikeSet::from_model(const SpikedModel& model) {
  SpikeSet s;
  s.d = model.d();
  s.v = model.directions();
  s.known.assign(s.d.size(), true);
  return s;
}

SpikeSet SpikeSet::strengths_only(int M, std::vector<double> d) {
  SpikeSet s;
  s.v = Eigen::MatrixXd::Zero(M, static_cast<Eigen::Index>(d.size()));
  s.known.assign(d.size(), false);
  s.d = std::move(d);
  return s;
}

void SpikeSet::validate() const {
  if (static_cast<Eigen::Index>(d.size()) != v.cols()) throw ConfigError("spike set: strengths and directions differ in count");
  if (!known.empty() && known.size() != d.size()) throw ConfigError("spike set: known mask has the wrong length");
  for (double x : d) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("spike set: strengths must be positive and finite");
  }
  std::vector<int> idx;
  for (int j = 0; j < rank(); ++j) {
    if (is_known(j)) idx.push_back(j);
  }
  Eigen::MatrixXd V(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) V.col(a) = v.col(idx[a]);
  check_orthonormal_columns(V, Tolerances{}.direction_orthonormal, "spike direction");
}

VarsigmaVector varsigma_at(const SpikeSet& spikes, const std::vector<int>& exclude, double d_ref,
                           const Eigen::VectorXd& w, const std::vector<int>& assume_orthogonal,
                           const Tolerances& tol) {
  if (w.size() != spikes.M()) throw ConfigError("probe vector has the wrong length");
  Eigen::VectorXd residual = w;
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(w.size());
  for (int j = 0; j < spikes.rank(); ++j) {
    if (contains(assume_orthogonal, j)) continue;
    require_known(spikes, j, "to form the weighted projection");
    const double overlap = spikes.v.col(j).dot(w);
    residual -= overlap * spikes.v.col(j);
    if (contains(exclude, j)) continue;
    const double dj = spikes.d[j];
    if (same_strength(dj, d_ref)) {
      if (std::abs(overlap) > tol.unit_norm) {
        std::ostringstream os;
        os << "overlapping spikes: spike " << j + 1 << " shares the reference strength and overlaps the probe";
        throw ConfigError(os.str());
      }
      continue;
    }
    weighted += d_ref * std::sqrt(dj + 1.0) / (d_ref - dj) * overlap * spikes.v.col(j);
  }
  VarsigmaVector out;
  out.vec = weighted + residual;
  out.norm = out.vec.norm();
  out.normalized = out.norm > 0.0 ? Eigen::VectorXd(out.vec / out.norm) : Eigen::VectorXd::Zero(w.size());
  return out;
}

VarsigmaVector varsigma(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::VectorXd& w,
                        const std::vector<int>& assume_orthogonal, const Tolerances& tol) {
  check_index_set(spikes, I);
  return varsigma_at(spikes, I, group_strength(spikes, I), w, assume_orthogonal, tol);
}

int LimitCovariance::index_of(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ConfigError("unknown covariance coordinate '" + label + "'");
  return static_cast<int>(it - labels.begin());
}

double LimitCovariance::at(const std::string& row, const std::string& col) const {
  return mat(index_of(row), index_of(col));
}

double LimitCovariance::min_eigenvalue() const {
  if (mat.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void LimitCovariance::validate(const Tolerances& tol) const {
  if (mat.rows() != mat.cols() || mat.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw NumericalError("covariance shape does not match its labels");
  }
  if (mat.size() == 0) return;
  if (!mat.allFinite()) throw NumericalError("covariance has non-finite entries");
  const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
  if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > tol.covariance_symmetry * scale) {
    throw NumericalError("covariance is not symmetric");
  }
  const double floor = -tol.psd_rel * std::max(mat.trace(), 0.0);
  const double lo = min_eigenvalue();
  if (lo < floor) {
    std::ostringstream os;
    os << "covariance is not positive semi-definite (smallest eigenvalue " << lo << ")";
    throw NumericalError(os.str());
  }
}

void write_covariance_csv(std::ostream& os, const LimitCovariance& c) {
  for (std::size_t i = 0; i < c.labels.size(); ++i) os << (i ? "," : "") << c.labels[i];
  os << '\n';
  write_matrix_csv(os, c.mat);
}

LimitCovariance read_covariance_csv(std::istream& is) {
  LimitCovariance c;
  std::string header;
  if (!std::getline(is, header)) throw ConfigError("covariance CSV is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::stringstream hs(header);
  for (std::string field; std::getline(hs, field, ',');) c.labels.push_back(field);
  c.mat = read_matrix_csv(is);
  if (c.mat.rows() != c.mat.cols() || c.mat.rows() != static_cast<Eigen::Index>(c.labels.size())) {
    throw ConfigError("covariance CSV must be square with one label per column");
  }
  return c;
}

CovAB cov_AB(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::VectorXd& w, double y,
             const Tolerances& tol) {
  const GroupLayout L = layout_group(spikes, I, w, y, tol);
  CovAB out;
  out.A = {L.labels, L.A};
  out.B = {L.labels, product_gram(L.products, spikes.M())};
  return out;
}

LimitCovariance cov_C_joint(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::VectorXd& w, double y,
                            double kappa4, const Tolerances& tol) {
  const GroupLayout L = layout_group(spikes, I, w, y, tol);
  std::vector<int> sorted_I = I;
  std::sort(sorted_I.begin(), sorted_I.end());
  const int nI = static_cast<int>(sorted_I.size());
  const double d = L.d;
  const double h = L.aux.h;
  const double c = 1.0 + 1.0 / d;

  std::vector<std::pair<int, int>> phi;
  for (int a = 0; a < nI; ++a) {
    for (int b = a; b < nI; ++b) phi.emplace_back(sorted_I[a], sorted_I[b]);
  }
  const int np = static_cast<int>(phi.size());
  const int n = np + static_cast<int>(L.labels.size());

  LimitCovariance out;
  for (const auto& [a, b] : phi) {
    out.labels.push_back(nI == 1 ? label("Phi", a + 1) : label("Phi", a + 1) + "_" + std::to_string(b + 1));
  }
  out.labels.insert(out.labels.end(), L.labels.begin(), L.labels.end());

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  G.bottomRightCorner(n - np, n - np) = L.A;
  for (int p = 0; p < np; ++p) {
    const auto [a, b] = phi[p];
    G(p, p) = (a == b ? 2.0 : 1.0) * c * c;
    const double cross = 2.0 * y * h * h * c * L.wI.dot(spikes.v.col(a)) * L.wI.dot(spikes.v.col(b));
    G(p, np) = G(np, p) = cross;
  }

  std::vector<ProductCoord> products;
  for (const auto& [a, b] : phi) products.push_back({c, Eigen::VectorXd(spikes.v.col(a)), Eigen::VectorXd(spikes.v.col(b))});
  products.insert(products.end(), L.products.begin(), L.products.end());

  out.mat = G + kappa4 * (1.0 - y / (d * d)) * product_gram(products, spikes.M());
  return out;
}

Eigen::MatrixXd s22_table(const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd sq = basis.array().square().matrix();
  return sq.transpose() * sq;
}

V1Spec v1(const std::vector<double>& d, const std::optional<Eigen::MatrixXd>& s22, double y, double kappa4,
          const Tolerances& tol) {
  const int r = static_cast<int>(d.size());
  if (r == 0) throw ConfigError("V1 needs at least one spike");
  if (kappa4 != 0.0) {
    if (!s22) throw ConfigError("V1 with kappa4 != 0 requires the s_{2,2} table of the hypothesized directions");
    if (s22->rows() != r || s22->cols() != r) throw ConfigError("s_{2,2} table has the wrong size");
  }

  V1Spec out;
  out.alpha.resize(2 * r);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * r, 2 * r);
  Eigen::VectorXd kphi(r), ktheta(r);
  for (int i = 0; i < r; ++i) {
    const double di = d[i];
    const AuxFunctions aux = aux_funcs(di, y, tol);
    const double root = std::sqrt(di * di - y);
    const double c = 1.0 + 1.0 / di;
    const double yh2 = y * aux.h * aux.h;
    out.alpha(i) = -y * (di * di + 2.0 * di + y) / ((di + y) * (di + y) * root);
    out.alpha(r + i) = 1.0 / root;
    G(i, i) = 2.0 * c * c;
    G(r + i, r + i) = 2.0 * yh2 * (1.0 + yh2);
    G(i, r + i) = G(r + i, i) = 2.0 * yh2 * c;
    const double scale = std::sqrt(1.0 - y / (di * di));
    kphi(i) = scale * c;
    ktheta(i) = scale * aux.f;
  }
  out.C.mat = G;
  if (kappa4 != 0.0) {
    Eigen::VectorXd k(2 * r);
    k << kphi, ktheta;
    Eigen::MatrixXd S(2 * r, 2 * r);
    S << *s22, *s22, *s22, *s22;
    out.C.mat += kappa4 * (k * k.transpose()).cwiseProduct(S);
  }
  for (int i = 0; i < r; ++i) out.C.labels.push_back(label("Phi", i + 1));
  for (int i = 0; i < r; ++i) out.C.labels.push_back(label("Theta", i + 1));
  out.value = out.alpha.dot(out.C.mat * out.alpha);
  return out;
}

double v1_all_equal_closed_form(double d, double y, int group_size, double kappa4, double sum_s22,
                                const Tolerances& tol) {
  if (group_size < 1) throw ConfigError("group size must be positive");
  const AuxFunctions aux = aux_funcs(d, y, tol);
  const double n = group_size;
  const double yh2 = y * aux.h * aux.h;
  const double den = (d + y) * (d + y);
  const double c = y * (d * d + 2.0 * d + y) * (1.0 + d) / (den * d);
  const double k = aux.f / d - y * (d * d + 2.0 * d + y) * (1.0 + d) / (den * d * d);
  const double lead = 2.0 / (d * d - y);
  return lead * (yh2 * n - c) * (yh2 * n - c) + lead * (yh2 * n + yh2 * yh2 * (n - n * n)) + kappa4 * k * k * sum_s22;
}

QU q_and_U(const SpikeSet& spikes, const std::vector<int>& I, const Eigen::MatrixXd& basis, double y, double kappa4,
           const Tolerances& tol) {
  spikes.validate();
  check_index_set(spikes, I);
  if (basis.rows() != spikes.M() || basis.cols() < 1) throw ConfigError("hypothesis basis has the wrong shape");
  check_orthonormal_columns(basis, tol.basis_orthonormal, "hypothesis basis");
  for (int k = 0; k < spikes.rank(); ++k) {
    if (!contains(I, k)) require_known(spikes, k, "for spikes outside the target set");
  }
  if (kappa4 != 0.0) {
    for (int i : I) require_known(spikes, i, "when kappa4 != 0");
  }

  std::vector<int> sorted_I = I;
  std::sort(sorted_I.begin(), sorted_I.end());
  const int nI = static_cast<int>(sorted_I.size());
  const int nJ = static_cast<int>(basis.cols());
  const int n = nI * nJ;

  // Under the null the basis is orthogonal to the target directions, so their
  // overlaps are taken as zero whether or not the directions are known.
  std::vector<VarsigmaVector> vs(n);
  std::vector<double> dd(n), hh(n);
  std::vector<int> who(n);
  QU out;
  for (int j = 0; j < nJ; ++j) {
    for (int a = 0; a < nI; ++a) {
      const int p = j * nI + a;
      const int i = sorted_I[a];
      who[p] = i;
      dd[p] = spikes.d[i];
      hh[p] = aux_funcs(dd[p], y, tol).h;
      vs[p] = varsigma_at(spikes, sorted_I, dd[p], basis.col(j), sorted_I, tol);
      out.q = std::max(out.q, hh[p] / dd[p] * vs[p].norm * vs[p].norm);
      out.U0.labels.push_back("u" + std::to_string(j + 1) + "_xi" + std::to_string(i + 1));
    }
  }
  out.U.labels = out.U0.labels;

  out.U0.mat = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    for (int s = 0; s < n; ++s) {
      if (who[p] == who[s]) out.U0.mat(p, s) = hh[p] * vs[p].normalized.dot(vs[s].normalized);
    }
  }
  if (kappa4 != 0.0) {
    std::vector<ProductCoord> products;
    for (int p = 0; p < n; ++p) {
      const double coef = std::sqrt((dd[p] * dd[p] - y) * hh[p]) / dd[p];
      products.push_back({coef, Eigen::VectorXd(spikes.v.col(who[p])), vs[p].normalized});
    }
    out.U0.mat += kappa4 * product_gram(products, spikes.M());
  }
  out.U.mat = out.U0.mat;
  for (int p = 0; p < n; ++p) {
    for (int s = 0; s < n; ++s) out.U.mat(p, s) *= vs[p].norm * vs[s].norm / std::sqrt(dd[p] * dd[s]);
  }
  return out;
}

MixtureSample::MixtureSample(std::vector<double> draws) : draws_(std::move(draws)) {
  std::sort(draws_.begin(), draws_.end());
}

double MixtureSample::quantile(double p) const {
  if (draws_.empty()) throw ConfigError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
  const auto B = static_cast<double>(draws_.size());
  auto k = static_cast<std::size_t>(std::ceil(p * B));
  k = std::clamp<std::size_t>(k, 1, draws_.size());
  return draws_[k - 1];
}

double MixtureSample::tail_p(double x) const {
  const auto above = static_cast<double>(draws_.end() - std::lower_bound(draws_.begin(), draws_.end(), x));
  return (above + 1.0) / (static_cast<double>(draws_.size()) + 1.0);
}

double MixtureSample::cdf(double x) const {
  if (draws_.empty()) return 0.0;
  const auto below = static_cast<double>(std::upper_bound(draws_.begin(), draws_.end(), x) - draws_.begin());
  return below / static_cast<double>(draws_.size());
}

MixtureSample simulate_quadratic_form(const LimitCovariance& U, double q, int draws, Stream& stream,
                                      const Tolerances& tol) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("mixture scale q must be positive");
  if (draws < 1000) throw ConfigError("at least 1000 mixture draws are required");
  U.validate(tol);
  const int n = U.size();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd root = Eigen::MatrixXd::Zero(n, n);
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(U.mat);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of U failed");
    lambda = es.eigenvalues().cwiseMax(0.0);
    root = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  }
  std::vector<double> out(static_cast<std::size_t>(draws));
  Eigen::VectorXd g(n);
  for (double& x : out) {
    for (int k = 0; k < n; ++k) g(k) = stream.normal();
    x = (root * g).squaredNorm() / q;
  }
  return MixtureSample(std::move(out));
}

}  // namespace spikelab
