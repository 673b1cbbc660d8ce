#include "ecot/scorers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecot/rng.hpp"

namespace ecot {

namespace {

std::atomic<std::uint64_t> g_fit_count{0};

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// #{c in sorted : s <= c}
std::size_t count_at_or_above(const std::vector<double>& sorted, double s) {
  return sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s);
}

bool all_rows_identical(const Matrix& a, const Matrix& b) {
  std::span<const double> ref = a.empty() ? b.row(0) : a.row(0);
  auto same = [&](const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      auto r = m.row(i);
      if (!std::equal(r.begin(), r.end(), ref.begin())) return false;
    }
    return true;
  };
  return same(a) && same(b);
}

struct Standardizer {
  std::vector<double> mean, scale;

  static Standardizer fit(const Matrix& a, const Matrix& b) {
    std::size_t d = a.empty() ? b.cols() : a.cols();
    double n = static_cast<double>(a.rows() + b.rows());
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    for (const Matrix* m : {&a, &b}) {
      for (std::size_t i = 0; i < m->rows(); ++i) {
        auto r = m->row(i);
        for (std::size_t c = 0; c < d; ++c) s.mean[c] += r[c];
      }
    }
    for (std::size_t c = 0; c < d; ++c) s.mean[c] /= n;
    for (const Matrix* m : {&a, &b}) {
      for (std::size_t i = 0; i < m->rows(); ++i) {
        auto r = m->row(i);
        for (std::size_t c = 0; c < d; ++c) {
          double dv = r[c] - s.mean[c];
          s.scale[c] += dv * dv;
        }
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      s.scale[c] = std::sqrt(s.scale[c] / n);
      if (s.scale[c] == 0.0) s.scale[c] = 1.0;
    }
    return s;
  }

  void apply(std::span<const double> x, std::vector<double>& out) const {
    out.resize(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
      out[c] = (x[c] - mean[c]) / scale[c];
    }
  }
};

// Solves (A + ridge*I) w = rhs in place via Cholesky. A is symmetric
// positive semi-definite, row-major d x d.
std::vector<double> solve_spd(std::vector<double> A, std::vector<double> rhs,
                              std::size_t d, double ridge) {
  for (std::size_t i = 0; i < d; ++i) A[i * d + i] += ridge;
  // Cholesky: A = L L^T
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= A[i * d + k] * A[j * d + k];
      if (i == j) {
        A[i * d + j] = std::sqrt(std::max(s, 1e-12));
      } else {
        A[i * d + j] = s / A[j * d + j];
      }
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < d; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= A[i * d + k] * rhs[k];
    rhs[i] = s / A[i * d + i];
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= A[k * d + ii] * rhs[k];
    rhs[ii] = s / A[ii * d + ii];
  }
  return rhs;
}

ScoreModel linear_score(std::vector<double> w, double b, Standardizer std_,
                        Symmetry tag, std::string fit_spec) {
  auto eval = [w, b, std_](std::span<const double> x) {
    std::vector<double> z;
    std_.apply(x, z);
    return sigmoid(dot(z, w) + b);
  };
  ScoreModel model(eval, tag, std::move(fit_spec));
  model.set_linear_weights(std::move(w));
  return model;
}

ScoreModel fit_logistic(const Matrix& class0, const Matrix& class1,
                        const LearnerConfig& spec, Symmetry tag) {
  auto std_ = Standardizer::fit(class0, class1);
  std::size_t d = class0.cols();
  int iters = static_cast<int>(spec.get("iters", 500));
  double l2 = spec.get("l2", 1e-3);
  double lr = spec.get("lr", 1.0);

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> z;
  std::vector<double> grad(d);
  for (int it = 0; it < iters; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    // Balanced loss: each class contributes its mean gradient.
    for (int cls = 0; cls < 2; ++cls) {
      const Matrix& m = cls == 0 ? class0 : class1;
      double y = static_cast<double>(cls);
      double inv = 0.5 / static_cast<double>(m.rows());
      for (std::size_t i = 0; i < m.rows(); ++i) {
        std_.apply(m.row(i), z);
        double r = (sigmoid(dot(z, w) + b) - y) * inv;
        for (std::size_t c = 0; c < d; ++c) grad[c] += r * z[c];
        gb += r;
      }
    }
    for (std::size_t c = 0; c < d; ++c) w[c] -= lr * (grad[c] + l2 * w[c]);
    b -= lr * gb;
  }
  return linear_score(std::move(w), b, std_, tag,
                      "logistic(" + spec.describe() + ")");
}

ScoreModel fit_lda(const Matrix& class0, const Matrix& class1,
                   const LearnerConfig& spec, Symmetry tag) {
  std::size_t d = class0.cols();
  auto mean_of = [&](const Matrix& m) {
    std::vector<double> mu(d, 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      auto r = m.row(i);
      for (std::size_t c = 0; c < d; ++c) mu[c] += r[c];
    }
    for (auto& v : mu) v /= static_cast<double>(m.rows());
    return mu;
  };
  auto mu0 = mean_of(class0);
  auto mu1 = mean_of(class1);

  std::vector<double> cov(d * d, 0.0);
  for (int cls = 0; cls < 2; ++cls) {
    const Matrix& m = cls == 0 ? class0 : class1;
    const auto& mu = cls == 0 ? mu0 : mu1;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      auto r = m.row(i);
      for (std::size_t a = 0; a < d; ++a) {
        double da = r[a] - mu[a];
        for (std::size_t bb = 0; bb <= a; ++bb) {
          cov[a * d + bb] += da * (r[bb] - mu[bb]);
        }
      }
    }
  }
  double denom = std::max<double>(1.0, static_cast<double>(class0.rows() + class1.rows() - 2));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t bb = 0; bb <= a; ++bb) {
      cov[a * d + bb] /= denom;
      cov[bb * d + a] = cov[a * d + bb];
    }
  }
  double tr = 0.0;
  for (std::size_t a = 0; a < d; ++a) tr += cov[a * d + a];
  double ridge = spec.get("ridge", 1e-6 * (tr / static_cast<double>(d)) + 1e-10);

  std::vector<double> diff(d);
  for (std::size_t c = 0; c < d; ++c) diff[c] = mu1[c] - mu0[c];
  auto w = solve_spd(std::move(cov), diff, d, ridge);
  double b = 0.0;
  for (std::size_t c = 0; c < d; ++c) b -= w[c] * 0.5 * (mu0[c] + mu1[c]);

  auto eval = [w, b](std::span<const double> x) { return sigmoid(dot(x, w) + b); };
  ScoreModel model(eval, tag, "lda(" + spec.describe() + ")");
  model.set_linear_weights(std::move(w));
  return model;
}

}  // namespace

std::string to_string(Symmetry s) {
  switch (s) {
    case Symmetry::general: return "general";
    case Symmetry::calibration_symmetric: return "calibration-symmetric";
    case Symmetry::joint_symmetric: return "joint-symmetric";
    case Symmetry::jackknife_type: return "jackknife-type";
    case Symmetry::label_monotone: return "label-monotone";
  }
  return "?";
}

bool is_calibration_symmetric(Symmetry s) {
  return s == Symmetry::calibration_symmetric || s == Symmetry::joint_symmetric;
}

double LearnerConfig::get(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string LearnerConfig::describe() const {
  std::string out = name;
  for (const auto& [k, v] : params) {
    out += "," + k + "=" + std::to_string(v);
  }
  return out;
}

ScoreModel ScoreModel::labeled(LabeledEvalFn eval, std::string fit_spec) {
  ScoreModel m;
  m.labeled_eval_ = std::move(eval);
  m.symmetry_ = Symmetry::label_monotone;
  m.fit_spec_ = std::move(fit_spec);
  return m;
}

double ScoreModel::operator()(std::span<const double> x) const {
  if (labeled_eval_) return labeled_eval_(x, 0);
  if (!eval_) throw std::logic_error("empty ScoreModel");
  return eval_(x);
}

double ScoreModel::operator()(std::span<const double> x, int label) const {
  if (!labeled_eval_) {
    throw std::logic_error("score model lacks a label argument");
  }
  return labeled_eval_(x, label);
}

ScoreModel negated(ScoreModel model) {
  if (model.has_label_argument()) {
    throw std::logic_error("cannot negate a label-monotone model");
  }
  ScoreModel base = model;
  return ScoreModel(
      [base](std::span<const double> x) { return -base(x); }, model.symmetry(),
      "negated " + model.fit_spec());
}

std::uint64_t fit_count() { return g_fit_count.load(); }
void reset_fit_count() { g_fit_count.store(0); }

ScoreModel fit_binary(const Matrix& class0, const Matrix& class1,
                      const LearnerConfig& spec, Symmetry tag) {
  if (class0.empty() || class1.empty()) {
    throw std::invalid_argument("fit_binary: both classes must be non-empty");
  }
  if (class0.cols() != class1.cols()) {
    throw std::invalid_argument("fit_binary: column mismatch");
  }
  g_fit_count.fetch_add(1);
  if (all_rows_identical(class0, class1)) {
    return ScoreModel([](std::span<const double>) { return 0.5; }, tag,
                      "constant 0.5 (degenerate: all rows identical)");
  }
  Matrix c0 = gather_rows(class0, canonical_row_order(class0));
  Matrix c1 = gather_rows(class1, canonical_row_order(class1));
  if (spec.name == "logistic") return fit_logistic(c0, c1, spec, tag);
  if (spec.name == "lda") return fit_lda(c0, c1, spec, tag);
  throw std::invalid_argument("unknown binary learner: " + spec.name);
}

namespace {

ScoreModel fit_knn(Matrix pool, const LearnerConfig& spec, Symmetry tag) {
  std::size_t p = pool.rows();
  auto k = static_cast<std::size_t>(
      spec.get("k", std::ceil(std::sqrt(static_cast<double>(p)))));
  if (k < 1 || k >= p) {
    throw std::invalid_argument("knn: k must be in [1, pool size)");
  }
  auto shared = std::make_shared<Matrix>(std::move(pool));
  auto eval = [shared, k](std::span<const double> x) {
    std::vector<double> dist(shared->rows());
    for (std::size_t i = 0; i < shared->rows(); ++i) {
      dist[i] = std::sqrt(squared_distance(shared->row(i), x));
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    return pairwise_sum({dist.data(), k}) / static_cast<double>(k);
  };
  return ScoreModel(eval, tag, "knn(k=" + std::to_string(k) + ")");
}

ScoreModel fit_kde(Matrix pool, const LearnerConfig& spec, Symmetry tag) {
  std::size_t p = pool.rows();
  double h = spec.get("bandwidth", 0.0);
  std::string note;
  if (h <= 0.0) {
    std::vector<double> dists;
    dists.reserve(p * (p - 1) / 2);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        dists.push_back(std::sqrt(squared_distance(pool.row(i), pool.row(j))));
      }
    }
    std::sort(dists.begin(), dists.end());
    h = dists.empty() ? 1.0 : dists[(dists.size() - 1) / 2];
  }
  if (h <= 0.0) {
    h = 1.0;
    note = ",degenerate-pool";
  }
  auto shared = std::make_shared<Matrix>(std::move(pool));
  double inv2h2 = 1.0 / (2.0 * h * h);
  auto eval = [shared, inv2h2](std::span<const double> x) {
    std::vector<double> terms(shared->rows());
    for (std::size_t i = 0; i < shared->rows(); ++i) {
      terms[i] = std::exp(-squared_distance(shared->row(i), x) * inv2h2);
    }
    std::sort(terms.begin(), terms.end());
    return -pairwise_sum(terms) / static_cast<double>(terms.size());
  };
  return ScoreModel(eval, tag, "kde(bandwidth=" + std::to_string(h) + note + ")");
}

}  // namespace

ScoreModel fit_one_class(const Matrix& pool, const LearnerConfig& spec,
                         Symmetry tag) {
  if (pool.rows() < 2) {
    throw std::invalid_argument("fit_one_class: pool needs at least 2 rows");
  }
  g_fit_count.fetch_add(1);
  Matrix canon = gather_rows(pool, canonical_row_order(pool));
  if (spec.name == "knn") return fit_knn(std::move(canon), spec, tag);
  if (spec.name == "kde") return fit_kde(std::move(canon), spec, tag);
  throw std::invalid_argument("unknown one-class learner: " + spec.name);
}

struct IntegrativeScorer::State {
  std::size_t n0 = 0;
  std::size_t n_labeled = 0;
  ScoreModel oc0;
  ScoreModel oc1;
  std::vector<int> train1;
  std::vector<double> sorted_s0_nulls;
  std::vector<double> sorted_s1_train;
  std::vector<double> s0_nulls, s0_tests, s1_nulls, s1_tests;
  std::string spec_desc;
};

IntegrativeScorer::IntegrativeScorer(const TestingProblem& problem,
                                     std::uint64_t split_seed,
                                     const LearnerConfig& one_class_spec,
                                     double split_fraction) {
  if (problem.n1() < 2) {
    throw std::invalid_argument("integrative score needs at least 2 labeled non-nulls");
  }
  auto state = std::make_shared<State>();
  state->n0 = problem.n0();
  state->n_labeled = problem.n();
  state->spec_desc = one_class_spec.describe();
  auto [train1, rest1] = split_indices(problem.nonnull_indices(), split_fraction,
                                       rng::derive(split_seed, "d1-split"));
  state->train1 = std::move(train1);

  state->oc0 = negated(fit_one_class(
      vstack(problem.null_features(), problem.test_features()), one_class_spec));
  std::vector<std::size_t> rows;
  rows.reserve(state->train1.size());
  for (int g : state->train1) {
    rows.push_back(static_cast<std::size_t>(g) - problem.n0());
  }
  Matrix d1t = gather_rows(problem.nonnull_features(), rows);
  if (d1t.rows() < 2) {
    // fit_one_class needs two rows; duplicate the singleton training point
    d1t = vstack(d1t, d1t);
  }
  state->oc1 = negated(fit_one_class(d1t, one_class_spec));

  state->s0_nulls.resize(problem.n0());
  state->s1_nulls.resize(problem.n0());
  for (std::size_t i = 0; i < problem.n0(); ++i) {
    state->s0_nulls[i] = state->oc0(problem.null_features().row(i));
    state->s1_nulls[i] = state->oc1(problem.null_features().row(i));
  }
  state->s0_tests.resize(problem.m());
  state->s1_tests.resize(problem.m());
  for (std::size_t j = 0; j < problem.m(); ++j) {
    state->s0_tests[j] = state->oc0(problem.test_features().row(j));
    state->s1_tests[j] = state->oc1(problem.test_features().row(j));
  }
  state->sorted_s0_nulls = state->s0_nulls;
  std::sort(state->sorted_s0_nulls.begin(), state->sorted_s0_nulls.end());
  state->sorted_s1_train.reserve(state->train1.size());
  for (std::size_t r : rows) {
    state->sorted_s1_train.push_back(state->oc1(problem.nonnull_features().row(r)));
  }
  std::sort(state->sorted_s1_train.begin(), state->sorted_s1_train.end());
  state_ = std::move(state);
}

double IntegrativeScorer::s0_value(std::span<const double> x) const {
  return state_->oc0(x);
}

double IntegrativeScorer::s1_value(std::span<const double> x) const {
  return state_->oc1(x);
}

double IntegrativeScorer::u0(double s0_x, double s0_at_j) const {
  std::size_t count = count_at_or_above(state_->sorted_s0_nulls, s0_x);
  count += (s0_x <= s0_at_j) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(state_->n0 + 1);
}

double IntegrativeScorer::u1(double s1_x) const {
  std::size_t count = count_at_or_above(state_->sorted_s1_train, s1_x) + 1;
  return static_cast<double>(count) /
         static_cast<double>(state_->sorted_s1_train.size() + 1);
}

const std::vector<double>& IntegrativeScorer::s0_at_nulls() const {
  return state_->s0_nulls;
}
const std::vector<double>& IntegrativeScorer::s0_at_tests() const {
  return state_->s0_tests;
}
const std::vector<double>& IntegrativeScorer::s1_at_nulls() const {
  return state_->s1_nulls;
}
const std::vector<double>& IntegrativeScorer::s1_at_tests() const {
  return state_->s1_tests;
}
const std::vector<int>& IntegrativeScorer::train_nonnull_indices() const {
  return state_->train1;
}

ScoreModel IntegrativeScorer::for_test_point(int j_global) const {
  std::size_t j = static_cast<std::size_t>(j_global) - state_->n_labeled;
  if (j >= state_->s0_tests.size()) {
    throw std::invalid_argument("for_test_point: j must be a test index");
  }
  IntegrativeScorer self = *this;  // shares state
  double s0_at_j = state_->s0_tests[j];
  auto eval = [self, s0_at_j](std::span<const double> x) {
    return self.ratio(self.s0_value(x), self.s1_value(x), s0_at_j);
  };
  return ScoreModel(eval, Symmetry::calibration_symmetric,
                    "integrative-ratio(" + state_->spec_desc + ")");
}

ScoreModel fit_integrative(const TestingProblem& problem, int j_global,
                           std::uint64_t split_seed,
                           const LearnerConfig& one_class_spec,
                           double split_fraction) {
  if (!problem.is_test_index(static_cast<std::size_t>(j_global))) {
    throw std::invalid_argument("fit_integrative: j must be a test index");
  }
  IntegrativeScorer scorer(problem, split_seed, one_class_spec, split_fraction);
  return scorer.for_test_point(j_global);
}

LocalizedFit fit_localized(const TestingProblem& problem, int j_global,
                           const LocalizedConfig& config) {
  if (config.bandwidth <= 0.0) {
    throw std::invalid_argument("fit_localized: bandwidth must be positive");
  }
  if (problem.n0() < 2) {
    throw std::invalid_argument("fit_localized: needs at least 2 labeled nulls");
  }
  if (!problem.is_test_index(static_cast<std::size_t>(j_global))) {
    throw std::invalid_argument("fit_localized: j must be a test index");
  }
  auto [train, calib] = split_indices(problem.null_indices(),
                                      config.train_fraction,
                                      rng::derive(config.split_seed, "d0-split"));
  std::vector<std::size_t> rows(train.begin(), train.end());
  ScoreModel base = fit_one_class(gather_rows(problem.null_features(), rows),
                                  config.base);

  // Anchor rows: calibration nulls plus the test point itself.
  auto anchors = std::make_shared<Matrix>(problem.null_features().cols() == 0
                                              ? Matrix{}
                                              : Matrix(calib.size() + 1,
                                                       problem.dim()));
  for (std::size_t i = 0; i < calib.size(); ++i) {
    anchors->set_row(i, problem.feature(static_cast<std::size_t>(calib[i])));
  }
  anchors->set_row(calib.size(), problem.feature(static_cast<std::size_t>(j_global)));
  auto base_scores = std::make_shared<std::vector<double>>();
  base_scores->reserve(anchors->rows());
  for (std::size_t i = 0; i < anchors->rows(); ++i) {
    base_scores->push_back(base(anchors->row(i)));
  }

  double inv2h2 = 1.0 / (2.0 * config.bandwidth * config.bandwidth);
  auto eval = [anchors, base_scores, base, inv2h2](std::span<const double> x) {
    double sx = base(x);
    std::size_t p = anchors->rows();
    std::vector<double> weights(p), hits(p);
    for (std::size_t i = 0; i < p; ++i) {
      weights[i] = std::exp(-squared_distance(anchors->row(i), x) * inv2h2);
      hits[i] = sx >= (*base_scores)[i] ? weights[i] : 0.0;
    }
    std::sort(weights.begin(), weights.end());
    std::sort(hits.begin(), hits.end());
    double den = pairwise_sum(weights);
    if (den == 0.0) {
      // all kernel weights underflowed; unweighted rank fallback
      double count = 0.0;
      for (double b : *base_scores) count += sx >= b ? 1.0 : 0.0;
      return count / static_cast<double>(p);
    }
    return pairwise_sum(hits) / den;
  };
  LocalizedFit out;
  out.model = ScoreModel(eval, Symmetry::calibration_symmetric,
                         "localized(" + config.base.describe() +
                             ",bandwidth=" + std::to_string(config.bandwidth) +
                             "; underflow falls back to unweighted rank)");
  out.calibration = calib;
  return out;
}

ScoreModel oracle_gaussian_ratio(std::vector<double> mu, double pi) {
  if (pi < 0.0 || pi >= 1.0) {
    throw std::invalid_argument("oracle_gaussian_ratio: pi must be in [0,1)");
  }
  double half_norm2 = 0.5 * dot(mu, mu);
  auto eval = [mu, pi, half_norm2](std::span<const double> x) {
    double t = dot(mu, x) - half_norm2;  // log f1/f0
    if (t >= 0.0) {
      return (1.0 - pi) / ((1.0 - pi) * std::exp(-t) + pi);
    }
    double rho = std::exp(t);
    return (1.0 - pi) * rho / ((1.0 - pi) + pi * rho);
  };
  return ScoreModel(eval, Symmetry::joint_symmetric,
                    "gaussian-density-ratio(pi=" + std::to_string(pi) + ")");
}

std::pair<std::vector<int>, std::vector<int>> split_indices(
    std::vector<int> indices, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("split fraction must be in (0,1)");
  }
  if (indices.size() < 2) {
    throw std::invalid_argument("cannot split fewer than 2 indices");
  }
  rng::Stream stream(seed);
  stream.shuffle(indices);
  auto take = static_cast<std::size_t>(
      std::lround(fraction * static_cast<double>(indices.size())));
  take = std::clamp<std::size_t>(take, 1, indices.size() - 1);
  std::vector<int> train(indices.begin(), indices.begin() + take);
  std::vector<int> rest(indices.begin() + take, indices.end());
  std::sort(train.begin(), train.end());
  std::sort(rest.begin(), rest.end());
  return {train, rest};
}

}  // namespace ecot
