#include "ecot/methods.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ecot/pvalues.hpp"
#include "ecot/rng.hpp"

namespace ecot {

namespace {

struct ScoreArrays {
  std::vector<double> calib;  // scores at the labeled null rows
  std::vector<double> test;   // scores at the test rows
};

ScoreArrays evaluate_on_problem(const TestingProblem& problem,
                                const ScoreModel& model) {
  ScoreArrays arrays;
  arrays.calib.resize(problem.n0());
  for (std::size_t i = 0; i < problem.n0(); ++i) {
    arrays.calib[i] = model(problem.null_features().row(i));
  }
  arrays.test.resize(problem.m());
  for (std::size_t j = 0; j < problem.m(); ++j) {
    arrays.test[j] = model(problem.test_features().row(j));
  }
  return arrays;
}

ScoreArrays evaluate_on_rows(const TestingProblem& problem,
                             const std::vector<int>& calib_indices,
                             const ScoreModel& model) {
  ScoreArrays arrays;
  arrays.calib.reserve(calib_indices.size());
  for (int g : calib_indices) {
    arrays.calib.push_back(model(problem.feature(static_cast<std::size_t>(g))));
  }
  arrays.test.resize(problem.m());
  for (std::size_t j = 0; j < problem.m(); ++j) {
    arrays.test[j] = model(problem.test_features().row(j));
  }
  return arrays;
}

RejectionReport bh_report(const TestingProblem& problem,
                          const std::vector<double>& pvalues,
                          const MethodSpec& spec) {
  RejectionReport report;
  report.seed = spec.seed;
  for (int j : bh(pvalues, spec.alpha)) {
    report.rejected.push_back(problem.test_index(static_cast<std::size_t>(j)));
  }
  report.r_init = report.rejected;
  return report;
}

// Conditional calibration for a single shared score function: the modified
// p-values come from the shared calibration scores plus the own-point score.
RejectionReport cc_shared_scores(const TestingProblem& problem,
                                 const ScoreArrays& arrays,
                                 const std::vector<double>& pvalues,
                                 const MethodSpec& spec,
                                 const std::vector<double>* weights) {
  std::vector<double> sorted_calib = arrays.calib;
  std::sort(sorted_calib.begin(), sorted_calib.end());
  double denom = static_cast<double>(arrays.calib.size() + 1);
  std::size_t m = problem.m();

  ConditionalProvider provider = [&](std::size_t j) {
    ConditionalInputs inputs;
    inputs.pvalue = pvalues[j];
    inputs.modified.assign(m, 0.0);
    double own = arrays.test[j];
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double s = arrays.test[l];
      std::size_t count = count_at_or_above(sorted_calib, s) + (s <= own ? 1 : 0);
      inputs.modified[l] = static_cast<double>(count) / denom;
    }
    return inputs;
  };

  if (weights) {
    NullPropProvider pi = [&](std::size_t j) { return (*weights)[j]; };
    return conditional_calibration(m, provider, spec.alpha, spec.seed, &pi,
                                   problem.n());
  }
  return conditional_calibration(m, provider, spec.alpha, spec.seed, nullptr,
                                 problem.n());
}

std::vector<double> storey_weights(const TestingProblem& problem,
                                   const MethodSpec& spec) {
  // Auxiliary joint-symmetric score used only for the null-proportion
  // estimate; the main score function stays free.
  ScoreModel aux = fit_one_class(
      vstack(problem.null_features(), problem.test_features()),
      spec.one_class_learner);
  ScoreArrays arrays = evaluate_on_problem(problem, aux);
  std::vector<double> weights(problem.m());
  for (std::size_t j = 0; j < problem.m(); ++j) {
    weights[j] = storey_null_proportion(arrays.calib, arrays.test, j,
                                        spec.storey_lambda);
  }
  return weights;
}

MethodOutput detail_ecot_bi(const TestingProblem& problem, const MethodSpec& spec) {
  ScoreModel model =
      fit_binary(vstack(problem.null_features(), problem.test_features()),
                 problem.nonnull_features(), spec.binary_learner);
  ScoreArrays arrays = evaluate_on_problem(problem, model);

  MethodOutput out;
  out.pvalues = split_conformal_pvalues(arrays.calib, arrays.test);
  out.test_scores = arrays.test;
  if (spec.null_prop == "storey") {
    auto weights = storey_weights(problem, spec);
    out.report = cc_shared_scores(problem, arrays, out.pvalues, spec, &weights);
  } else if (spec.use_conditional_calibration) {
    out.report = cc_shared_scores(problem, arrays, out.pvalues, spec, nullptr);
  } else {
    out.report = bh_report(problem, out.pvalues, spec);
  }
  return out;
}

MethodOutput detail_ecot_oc(const TestingProblem& problem, const MethodSpec& spec) {
  IntegrativeScorer scorer(problem, rng::derive(spec.seed, "ecot-oc"),
                           spec.one_class_learner, spec.split_fraction);
  std::size_t m = problem.m();
  std::size_t n0 = problem.n0();
  double denom = static_cast<double>(n0 + 1);

  const auto& s0n = scorer.s0_at_nulls();
  const auto& s1n = scorer.s1_at_nulls();
  const auto& s0t = scorer.s0_at_tests();
  const auto& s1t = scorer.s1_at_tests();

  MethodOutput out;
  out.pvalues.resize(m);
  out.test_scores.resize(m);

  auto calibration_scores = [&](std::size_t j, std::vector<double>& sorted_out) {
    double s0j = s0t[j];
    sorted_out.resize(n0 + 1);
    for (std::size_t i = 0; i < n0; ++i) {
      sorted_out[i] = scorer.ratio(s0n[i], s1n[i], s0j);
    }
    sorted_out[n0] = scorer.ratio(s0t[j], s1t[j], s0j);
    std::sort(sorted_out.begin(), sorted_out.end());
  };

  std::vector<double> sorted;
  for (std::size_t j = 0; j < m; ++j) {
    double own = scorer.ratio(s0t[j], s1t[j], s0t[j]);
    out.test_scores[j] = own;
    calibration_scores(j, sorted);
    out.pvalues[j] =
        static_cast<double>(count_at_or_above(sorted, own)) / denom;
  }

  ConditionalProvider provider = [&](std::size_t j) {
    ConditionalInputs inputs;
    inputs.pvalue = out.pvalues[j];
    inputs.modified.assign(m, 0.0);
    std::vector<double> sorted_j;
    calibration_scores(j, sorted_j);
    double s0j = s0t[j];
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double s = scorer.ratio(s0t[l], s1t[l], s0j);
      inputs.modified[l] =
          static_cast<double>(count_at_or_above(sorted_j, s)) / denom;
    }
    return inputs;
  };

  if (spec.null_prop == "storey") {
    auto weights = storey_weights(problem, spec);
    NullPropProvider pi = [&](std::size_t j) { return weights[j]; };
    out.report = conditional_calibration(m, provider, spec.alpha, spec.seed,
                                         &pi, problem.n());
  } else {
    out.report = conditional_calibration(m, provider, spec.alpha, spec.seed,
                                         nullptr, problem.n());
  }
  return out;
}

// One-class score on the pool of every available sample; symmetric in the
// labeled non-nulls as well, which the label-assisted estimator requires.
MethodOutput detail_label_assisted(const TestingProblem& problem,
                                   const MethodSpec& spec) {
  Matrix pool = vstack(vstack(problem.null_features(), problem.nonnull_features()),
                       problem.test_features());
  ScoreModel model = fit_one_class(pool, spec.one_class_learner);
  ScoreArrays arrays = evaluate_on_problem(problem, model);

  MethodOutput out;
  out.pvalues = split_conformal_pvalues(arrays.calib, arrays.test);
  out.test_scores = arrays.test;
  double pi_hat = label_assisted_null_proportion(problem.n0(), problem.n1());
  std::vector<double> weights(problem.m(), pi_hat);
  out.report = cc_shared_scores(problem, arrays, out.pvalues, spec, &weights);
  return out;
}

MethodOutput detail_joint_model_bh(const TestingProblem& problem,
                                   const MethodSpec& spec,
                                   const ScoreModel& model) {
  ScoreArrays arrays = evaluate_on_problem(problem, model);
  MethodOutput out;
  out.pvalues = split_conformal_pvalues(arrays.calib, arrays.test);
  out.test_scores = arrays.test;
  if (spec.null_prop == "storey") {
    auto weights = storey_weights(problem, spec);
    out.report = cc_shared_scores(problem, arrays, out.pvalues, spec, &weights);
  } else {
    out.report = bh_report(problem, out.pvalues, spec);
  }
  return out;
}

MethodOutput detail_split_baseline(const TestingProblem& problem,
                                   const MethodSpec& spec) {
  auto [train0, calib0] = split_indices(problem.null_indices(),
                                        spec.split_fraction,
                                        rng::derive(spec.seed, "d0-split"));
  std::vector<std::size_t> train_rows(train0.begin(), train0.end());
  Matrix d0t = gather_rows(problem.null_features(), train_rows);

  ScoreModel model;
  if (spec.name == "cp-oc") {
    model = fit_one_class(d0t, spec.one_class_learner);
  } else if (spec.name == "cp-bi") {
    model = fit_binary(d0t, problem.nonnull_features(), spec.binary_learner);
  } else if (spec.name == "adadetect") {
    std::vector<std::size_t> calib_rows(calib0.begin(), calib0.end());
    Matrix other = vstack(gather_rows(problem.null_features(), calib_rows),
                          problem.test_features());
    model = fit_binary(d0t, other, spec.binary_learner);
  } else {
    throw std::invalid_argument("unknown split baseline: " + spec.name);
  }

  ScoreArrays arrays = evaluate_on_rows(problem, calib0, model);
  MethodOutput out;
  out.pvalues = split_conformal_pvalues(arrays.calib, arrays.test);
  out.test_scores = arrays.test;
  out.report = bh_report(problem, out.pvalues, spec);
  return out;
}

MethodOutput detail_integ(const TestingProblem& problem, const MethodSpec& spec) {
  auto [train0, calib0] = split_indices(problem.null_indices(),
                                        spec.split_fraction,
                                        rng::derive(spec.seed, "d0-split"));
  auto [train1, calib1] = split_indices(problem.nonnull_indices(),
                                        spec.split_fraction,
                                        rng::derive(spec.seed, "d1-split"));
  auto rows_of = [&](const std::vector<int>& idx, const Matrix& mat,
                     std::size_t offset) {
    std::vector<std::size_t> rows;
    rows.reserve(idx.size());
    for (int g : idx) rows.push_back(static_cast<std::size_t>(g) - offset);
    return gather_rows(mat, rows);
  };
  Matrix d0t = rows_of(train0, problem.null_features(), 0);
  Matrix d1t = rows_of(train1, problem.nonnull_features(), problem.n0());
  if (d1t.rows() < 2) d1t = vstack(d1t, d1t);

  // The rank maps want larger = more typical, hence the negation.
  ScoreModel s0 = negated(fit_one_class(d0t, spec.one_class_learner));
  ScoreModel s1 = negated(fit_one_class(d1t, spec.one_class_learner));

  std::size_t c = calib0.size();
  std::size_t m = problem.m();
  std::vector<double> s0_calib(c), s1_calib(c);
  for (std::size_t i = 0; i < c; ++i) {
    auto x = problem.feature(static_cast<std::size_t>(calib0[i]));
    s0_calib[i] = s0(x);
    s1_calib[i] = s1(x);
  }
  std::vector<double> s0_test(m), s1_test(m);
  for (std::size_t j = 0; j < m; ++j) {
    auto x = problem.test_features().row(j);
    s0_test[j] = s0(x);
    s1_test[j] = s1(x);
  }
  std::vector<double> sorted_s0_calib = s0_calib;
  std::sort(sorted_s0_calib.begin(), sorted_s0_calib.end());
  std::vector<double> sorted_s1_calib1;
  for (int g : calib1) {
    sorted_s1_calib1.push_back(
        s1(problem.feature(static_cast<std::size_t>(g))));
  }
  std::sort(sorted_s1_calib1.begin(), sorted_s1_calib1.end());

  double u1_floor = 1.0 / static_cast<double>(sorted_s1_calib1.size() + 1);
  auto u0 = [&](double s0x, double s0j) {
    std::size_t count = count_at_or_above(sorted_s0_calib, s0x) +
                        (s0x <= s0j ? 1 : 0);
    return static_cast<double>(count) / static_cast<double>(c + 1);
  };
  auto u1 = [&](double s1x) {
    std::size_t count = count_at_or_above(sorted_s1_calib1, s1x);
    double v = static_cast<double>(count) /
               static_cast<double>(sorted_s1_calib1.size() + 1);
    return std::max(v, u1_floor);  // keep the ratio finite
  };
  auto ratio = [&](double s0x, double s1x, double s0j) {
    return u0(s0x, s0j) / u1(s1x);
  };

  MethodOutput out;
  out.pvalues.resize(m);
  out.test_scores.resize(m);
  double denom = static_cast<double>(c + 1);

  auto calibration_scores = [&](std::size_t j, std::vector<double>& sorted_out) {
    double s0j = s0_test[j];
    sorted_out.resize(c + 1);
    for (std::size_t i = 0; i < c; ++i) {
      sorted_out[i] = ratio(s0_calib[i], s1_calib[i], s0j);
    }
    sorted_out[c] = ratio(s0_test[j], s1_test[j], s0j);
    std::sort(sorted_out.begin(), sorted_out.end());
  };

  std::vector<double> sorted;
  for (std::size_t j = 0; j < m; ++j) {
    double own = ratio(s0_test[j], s1_test[j], s0_test[j]);
    out.test_scores[j] = own;
    calibration_scores(j, sorted);
    out.pvalues[j] =
        static_cast<double>(count_at_or_above(sorted, own)) / denom;
  }

  ConditionalProvider provider = [&](std::size_t j) {
    ConditionalInputs inputs;
    inputs.pvalue = out.pvalues[j];
    inputs.modified.assign(m, 0.0);
    std::vector<double> sorted_j;
    calibration_scores(j, sorted_j);
    double s0j = s0_test[j];
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double s = ratio(s0_test[l], s1_test[l], s0j);
      inputs.modified[l] =
          static_cast<double>(count_at_or_above(sorted_j, s)) / denom;
    }
    return inputs;
  };
  out.report = conditional_calibration(m, provider, spec.alpha, spec.seed,
                                       nullptr, problem.n());
  return out;
}

}  // namespace

std::vector<double> split_conformal_pvalues(const std::vector<double>& calib_scores,
                                            const std::vector<double>& test_scores) {
  std::vector<double> sorted = calib_scores;
  std::sort(sorted.begin(), sorted.end());
  double denom = static_cast<double>(calib_scores.size() + 1);
  std::vector<double> p(test_scores.size());
  for (std::size_t j = 0; j < test_scores.size(); ++j) {
    p[j] = static_cast<double>(count_at_or_above(sorted, test_scores[j]) + 1) /
           denom;
  }
  return p;
}

bool is_known_method(const std::string& name) {
  static const std::set<std::string> names = {
      "ecot-bi", "ecot-oc", "ecot-as", "cp-oc",
      "cp-bi",   "adadetect", "fullnd", "integ"};
  return names.count(name) > 0;
}

std::size_t method_min_nonnulls(const MethodSpec& spec) {
  if (spec.name == "ecot-bi" || spec.name == "cp-bi") return 1;
  if (spec.name == "ecot-oc" || spec.name == "ecot-as" || spec.name == "integ") {
    return 2;
  }
  return 0;
}

void validate_method(const TestingProblem& problem, const MethodSpec& spec) {
  if (!is_known_method(spec.name)) {
    throw std::invalid_argument("unknown method: " + spec.name);
  }
  if (spec.alpha <= 0.0 || spec.alpha >= 1.0) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  if (spec.split_fraction <= 0.0 || spec.split_fraction >= 1.0) {
    throw std::invalid_argument("split fraction must lie in (0,1)");
  }
  if (spec.null_prop != "none" && spec.null_prop != "storey" &&
      spec.null_prop != "label-assisted") {
    throw std::invalid_argument("unknown null-proportion estimator: " + spec.null_prop);
  }
  if (spec.null_prop != "none" && spec.name != "ecot-bi" &&
      spec.name != "ecot-oc" && spec.name != "fullnd") {
    throw std::invalid_argument("null-proportion weighting is supported for "
                                "ecot-bi, ecot-oc and fullnd only");
  }
  if (spec.null_prop == "storey" &&
      (spec.storey_lambda <= 0.0 || spec.storey_lambda >= 1.0)) {
    throw std::invalid_argument("storey lambda must lie in (0,1)");
  }
  if (problem.n1() < method_min_nonnulls(spec)) {
    throw std::invalid_argument(spec.name + " needs at least " +
                                std::to_string(method_min_nonnulls(spec)) +
                                " labeled non-null samples");
  }
  bool splits_nulls = spec.name == "cp-oc" || spec.name == "cp-bi" ||
                      spec.name == "adadetect" || spec.name == "integ";
  if (splits_nulls && problem.n0() < 2) {
    throw std::invalid_argument(spec.name + " needs at least 2 labeled nulls to split");
  }
}

MethodOutput run_method_detailed(const TestingProblem& problem,
                                 const MethodSpec& spec) {
  validate_method(problem, spec);
  if (spec.null_prop == "label-assisted") {
    return detail_label_assisted(problem, spec);
  }
  if (spec.name == "ecot-bi") return detail_ecot_bi(problem, spec);
  if (spec.name == "ecot-oc") return detail_ecot_oc(problem, spec);
  if (spec.name == "fullnd") {
    ScoreModel model = fit_one_class(
        vstack(problem.null_features(), problem.test_features()),
        spec.one_class_learner);
    return detail_joint_model_bh(problem, spec, model);
  }
  if (spec.name == "cp-oc" || spec.name == "cp-bi" || spec.name == "adadetect") {
    return detail_split_baseline(problem, spec);
  }
  if (spec.name == "integ") return detail_integ(problem, spec);
  if (spec.name == "ecot-as") {
    MethodOutput out;
    out.report = run_ecot_as(problem, spec, default_candidates(problem, spec));
    return out;
  }
  throw std::invalid_argument("unknown method: " + spec.name);
}

RejectionReport run_method(const TestingProblem& problem, const MethodSpec& spec) {
  return run_method_detailed(problem, spec).report;
}

RejectionReport run_ecot_bi(const TestingProblem& problem, const MethodSpec& spec) {
  if (problem.n1() < 1) {
    throw std::invalid_argument("ecot-bi needs labeled non-null samples");
  }
  return detail_ecot_bi(problem, spec).report;
}

RejectionReport run_ecot_oc(const TestingProblem& problem, const MethodSpec& spec) {
  if (problem.n1() < 2) {
    throw std::invalid_argument("ecot-oc needs at least 2 labeled non-null samples");
  }
  return detail_ecot_oc(problem, spec).report;
}

RejectionReport run_baseline(const TestingProblem& problem, const MethodSpec& spec) {
  if (spec.name == "fullnd") {
    ScoreModel model = fit_one_class(
        vstack(problem.null_features(), problem.test_features()),
        spec.one_class_learner);
    return detail_joint_model_bh(problem, spec, model).report;
  }
  if (spec.name == "cp-oc" || spec.name == "cp-bi" || spec.name == "adadetect") {
    return detail_split_baseline(problem, spec).report;
  }
  if (spec.name == "integ") return detail_integ(problem, spec).report;
  throw std::invalid_argument("not a baseline method: " + spec.name);
}

std::vector<Candidate> default_candidates(const TestingProblem& problem,
                                          const MethodSpec& spec) {
  if (problem.n1() < 2) {
    throw std::invalid_argument("default candidate set needs at least 2 labeled non-nulls");
  }
  std::vector<Candidate> candidates;

  ScoreModel bi =
      fit_binary(vstack(problem.null_features(), problem.test_features()),
                 problem.nonnull_features(), spec.binary_learner);
  auto bi_arrays = std::make_shared<ScoreArrays>(evaluate_on_problem(problem, bi));
  candidates.push_back(Candidate{
      "ecot-bi", Symmetry::joint_symmetric,
      [bi_arrays](std::size_t, std::vector<double>& calib,
                  std::vector<double>& test) {
        calib = bi_arrays->calib;
        test = bi_arrays->test;
      }});

  auto scorer = std::make_shared<IntegrativeScorer>(
      problem, rng::derive(spec.seed, "ecot-oc"), spec.one_class_learner,
      spec.split_fraction);
  candidates.push_back(Candidate{
      "ecot-oc", Symmetry::calibration_symmetric,
      [scorer](std::size_t j, std::vector<double>& calib,
               std::vector<double>& test) {
        const auto& s0n = scorer->s0_at_nulls();
        const auto& s1n = scorer->s1_at_nulls();
        const auto& s0t = scorer->s0_at_tests();
        const auto& s1t = scorer->s1_at_tests();
        double s0j = s0t[j];
        calib.resize(s0n.size());
        for (std::size_t i = 0; i < s0n.size(); ++i) {
          calib[i] = scorer->ratio(s0n[i], s1n[i], s0j);
        }
        test.resize(s0t.size());
        for (std::size_t l = 0; l < s0t.size(); ++l) {
          test[l] = scorer->ratio(s0t[l], s1t[l], s0j);
        }
      }});

  ScoreModel oc = fit_one_class(
      vstack(problem.null_features(), problem.test_features()),
      spec.one_class_learner);
  auto oc_arrays = std::make_shared<ScoreArrays>(evaluate_on_problem(problem, oc));
  candidates.push_back(Candidate{
      "fullnd", Symmetry::joint_symmetric,
      [oc_arrays](std::size_t, std::vector<double>& calib,
                  std::vector<double>& test) {
        calib = oc_arrays->calib;
        test = oc_arrays->test;
      }});
  return candidates;
}

namespace {

struct CandidateScratch {
  std::vector<double> calib, test, sorted, modified;
};

// Modified p-values of candidate k at test point j, from its score arrays.
void candidate_modified(const CandidateScratch& scratch, std::size_t j,
                        std::vector<double>& out) {
  std::size_t m = scratch.test.size();
  double denom = static_cast<double>(scratch.sorted.size());
  out.assign(m, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    if (l == j) continue;
    out[l] = static_cast<double>(
                 count_at_or_above(scratch.sorted, scratch.test[l])) /
             denom;
  }
}

}  // namespace

RejectionReport run_ecot_as(const TestingProblem& problem, const MethodSpec& spec,
                            const std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("approach selection needs at least one candidate");
  }
  if (spec.null_prop != "none") {
    throw std::invalid_argument("approach selection does not support "
                                "null-proportion weighting");
  }
  std::size_t m = problem.m();
  std::size_t K = candidates.size();

  // Joint-symmetric candidates have j-independent score arrays; fetch once.
  std::vector<CandidateScratch> cached(K);
  std::vector<bool> is_joint(K);
  for (std::size_t k = 0; k < K; ++k) {
    is_joint[k] = candidates[k].symmetry == Symmetry::joint_symmetric;
    if (is_joint[k]) {
      candidates[k].scores_for(0, cached[k].calib, cached[k].test);
    }
  }

  ConditionalProvider provider = [&](std::size_t j) {
    CandidateScratch scratch;
    ConditionalInputs best;
    int best_rejections = -1;
    std::vector<double> modified;
    for (std::size_t k = 0; k < K; ++k) {
      const CandidateScratch* arrays;
      if (is_joint[k]) {
        arrays = &cached[k];
      } else {
        candidates[k].scores_for(j, scratch.calib, scratch.test);
        arrays = &scratch;
      }
      CandidateScratch view;
      view.test = arrays->test;
      view.sorted = arrays->calib;
      view.sorted.push_back(arrays->test[j]);
      std::sort(view.sorted.begin(), view.sorted.end());
      candidate_modified(view, j, modified);
      int rejections = static_cast<int>(bh(modified, spec.alpha).size());
      if (rejections > best_rejections) {
        best_rejections = rejections;
        best.modified = modified;
        best.pvalue =
            static_cast<double>(count_at_or_above(view.sorted, arrays->test[j])) /
            static_cast<double>(view.sorted.size());
      }
    }
    return best;
  };

  return conditional_calibration(m, provider, spec.alpha, spec.seed, nullptr,
                                 problem.n());
}

double joint_selection_criterion(const TestingProblem& problem,
                                 const ScoreModel& model) {
  if (problem.n1() == 0) {
    throw std::invalid_argument("the rank criterion needs labeled non-nulls");
  }
  std::vector<double> nonnull_scores;
  nonnull_scores.reserve(problem.n1());
  for (std::size_t i = 0; i < problem.n1(); ++i) {
    nonnull_scores.push_back(model(problem.nonnull_features().row(i)));
  }
  std::sort(nonnull_scores.begin(), nonnull_scores.end());
  double total = 0.0;
  std::size_t pool_size = problem.n0() + problem.m();
  auto fraction_below = [&](double s) {
    std::size_t count = std::upper_bound(nonnull_scores.begin(),
                                         nonnull_scores.end(), s) -
                        nonnull_scores.begin();
    return static_cast<double>(count) / static_cast<double>(nonnull_scores.size());
  };
  for (std::size_t i = 0; i < problem.n0(); ++i) {
    total += fraction_below(model(problem.null_features().row(i)));
  }
  for (std::size_t j = 0; j < problem.m(); ++j) {
    total += fraction_below(model(problem.test_features().row(j)));
  }
  return total / static_cast<double>(pool_size);
}

RejectionReport run_ecot_as_joint(const TestingProblem& problem,
                                  const MethodSpec& spec,
                                  const std::vector<ScoreModel>& candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("approach selection needs at least one candidate");
  }
  if (problem.n1() == 0) {
    throw std::invalid_argument("joint approach selection needs labeled non-nulls");
  }
  std::size_t best_k = 0;
  double best_value = -1.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k].symmetry() != Symmetry::joint_symmetric) {
      throw std::logic_error("joint approach selection needs joint-symmetric candidates");
    }
    double value = joint_selection_criterion(problem, candidates[k]);
    if (value > best_value) {  // ties keep the smallest index
      best_value = value;
      best_k = k;
    }
  }
  ScoreArrays arrays = evaluate_on_problem(problem, candidates[best_k]);
  auto pvalues = split_conformal_pvalues(arrays.calib, arrays.test);
  return bh_report(problem, pvalues, spec);
}

RejectionReport run_naive_selection(const TestingProblem& problem,
                                    const MethodSpec& spec,
                                    const std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("selection needs at least one candidate");
  }
  std::size_t m = problem.m();
  std::vector<double> best_pvalues;
  int best_rejections = -1;
  std::vector<double> calib, test, pvalues(m);
  for (const auto& candidate : candidates) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j == 0 || candidate.symmetry != Symmetry::joint_symmetric) {
        candidate.scores_for(j, calib, test);
        std::sort(calib.begin(), calib.end());
      }
      pvalues[j] =
          static_cast<double>(count_at_or_above(calib, test[j]) + 1) /
          static_cast<double>(calib.size() + 1);
    }
    int rejections = static_cast<int>(bh(pvalues, spec.alpha).size());
    if (rejections > best_rejections) {
      best_rejections = rejections;
      best_pvalues = pvalues;
    }
  }
  return bh_report(problem, best_pvalues, spec);
}

}  // namespace ecot
