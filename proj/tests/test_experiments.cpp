// Tests for the config parser/validator, the experiment runner (determinism,
// normalization plumbing, finite-N law agreement), the emitters, and the
// closed-form constants report.

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "haarmax/experiments.hpp"

using namespace haarmax;

namespace {

std::string expect_config_error(const std::string& text) {
  try {
    validate_config(parse_config_text(text));
  } catch (const ConfigError& e) {
    return e.field();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return "";
}

ExperimentConfig small_gaussian_config() {
  ExperimentConfig cfg;
  cfg.theorem = TheoremKind::FixedRank;
  cfg.field = FieldKind::Real;
  cfg.source = SourceSel::Gaussian;
  cfg.spectrum.emplace(std::vector<double>{1.0});
  cfg.N = 500;
  cfg.M = 300;
  cfg.seed = 42;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST(ConfigParser, ReadsFullSchema) {
  const std::string text = R"(# an experiment
theorem = fixed_rank
field = real
source = both
mode = max_abs
spectrum = 1, 1, -1
n = 2000
m = 5000
seed = 0xDEADBEEF   # hex seeds are allowed
workers = 8
diagnostics = true
epsilon = 0.07
check.two_sample_ks = 0.04
check.ks_vs_limit = 0.2
)";
  const ExperimentConfig cfg = parse_config_text(text);
  EXPECT_EQ(cfg.theorem, TheoremKind::FixedRank);
  EXPECT_EQ(cfg.field, FieldKind::Real);
  EXPECT_EQ(cfg.source, SourceSel::Both);
  EXPECT_EQ(cfg.mode, ExtremalMode::MaxAbs);
  ASSERT_TRUE(cfg.spectrum.has_value());
  EXPECT_EQ(cfg.spectrum->values, (std::vector<double>{1.0, 1.0, -1.0}));
  EXPECT_EQ(cfg.N, 2000);
  EXPECT_EQ(cfg.M, 5000);
  EXPECT_EQ(cfg.seed, 0xDEADBEEFull);
  EXPECT_EQ(cfg.workers, 8);
  EXPECT_TRUE(cfg.diagnostics);
  EXPECT_EQ(cfg.epsilon, 0.07);
  ASSERT_TRUE(cfg.check_two_sample_ks.has_value());
  EXPECT_EQ(*cfg.check_two_sample_ks, 0.04);
  ASSERT_TRUE(cfg.check_ks_vs_limit.has_value());
  EXPECT_EQ(*cfg.check_ks_vs_limit, 0.2);
  EXPECT_NO_THROW(validate_config(cfg));
}

TEST(ConfigParser, ReportsTheOffendingKey) {
  try {
    parse_config_text("frobnicate = 1\n");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "frobnicate");
  }
  try {
    parse_config_text("n 100\n");
    FAIL() << "missing '=' accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "line 1");
  }
  try {
    parse_config_text("alpha = zebra\n");
    FAIL() << "non-numeric accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "alpha");
  }
  try {
    parse_config_text("diagnostics = maybe\n");
    FAIL() << "bad boolean accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "diagnostics");
  }
  try {
    parse_config_text("seed = 0xZZ\n");
    FAIL() << "bad seed accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "seed");
  }
}

TEST(ConfigValidation, FieldPathsForEveryRule) {
  const std::string base = "theorem = fixed_rank\nspectrum = 1\nn = 500\nm = 200\n";
  EXPECT_EQ(expect_config_error("theorem = fixed_rank\nspectrum = 1\nn = 500\nm = 50\n"),
            "m");
  EXPECT_EQ(expect_config_error("theorem = fixed_rank\nspectrum = 1\nn = 2\nm = 200\n"),
            "n");
  EXPECT_EQ(expect_config_error(base + "workers = 0\n"), "workers");
  EXPECT_EQ(expect_config_error("theorem = fixed_rank\nn = 500\nm = 200\n"), "spectrum");
  EXPECT_EQ(expect_config_error(base + "field = complex\n"), "field");
  EXPECT_EQ(expect_config_error(
                "theorem = rank_one\nspectrum = 1, 2\nn = 500\nm = 200\n"),
            "spectrum");
  EXPECT_EQ(expect_config_error("theorem = rank_one\nfield = complex\nspectrum = -1\n"
                                "n = 500\nm = 200\n"),
            "spectrum");
  EXPECT_EQ(expect_config_error("theorem = rank_one\nfield = complex\nspectrum = 1\n"
                                "mode = min\nn = 500\nm = 200\n"),
            "mode");
  EXPECT_EQ(expect_config_error(
                "theorem = diverging_rank\nspectrum = 1\nalpha = 0.3\nn = 500\nm = 200\n"),
            "spectrum");
  EXPECT_EQ(expect_config_error("theorem = diverging_rank\nalpha = 1.2\nn = 500\nm = 200\n"),
            "alpha");
  EXPECT_EQ(expect_config_error("theorem = diverging_rank\nalpha = 0.3\nfield = complex\n"
                                "n = 500\nm = 200\n"),
            "field");
  EXPECT_EQ(expect_config_error("theorem = diverging_rank\nalpha = 0.6\nsource = haar\n"
                                "n = 500\nm = 200\n"),
            "alpha");
  EXPECT_EQ(expect_config_error("theorem = que\nn = 500\nm = 200\n"), "spectrum");
  EXPECT_EQ(expect_config_error(
                "theorem = que\nspectrum = 1,1\nsource = gaussian\nn = 500\nm = 200\n"),
            "source");
  EXPECT_EQ(expect_config_error(
                "theorem = que\nspectrum = 1,1\nfield = complex\nn = 500\nm = 200\n"),
            "field");
}

TEST(ConfigValidation, RankAboveDimension) {
  EXPECT_EQ(expect_config_error(
                "theorem = fixed_rank\nspectrum = 1,1,1,1\nn = 3\nm = 200\n"),
            "spectrum");
}

TEST(Runner, WorkerCountDoesNotChangeResults) {
  ExperimentConfig cfg = small_gaussian_config();
  cfg.workers = 1;
  const ExperimentResult serial = run(cfg);
  cfg.workers = 8;
  const ExperimentResult parallel = run(cfg);
  ASSERT_TRUE(serial.gaussian && parallel.gaussian);
  ASSERT_EQ(serial.gaussian->raw_by_replica.size(),
            parallel.gaussian->raw_by_replica.size());
  for (std::size_t i = 0; i < serial.gaussian->raw_by_replica.size(); ++i)
    EXPECT_EQ(serial.gaussian->raw_by_replica[i], parallel.gaussian->raw_by_replica[i]);
}

TEST(Runner, NormalizationIsAffineInTheRawSample) {
  ExperimentConfig cfg = small_gaussian_config();
  const ExperimentResult r = run(cfg);
  ASSERT_TRUE(r.gaussian.has_value());
  for (std::size_t i = 0; i < r.gaussian->raw_by_replica.size(); ++i) {
    const double want =
        r.normalization.scale * r.gaussian->raw_by_replica[i] + r.normalization.shift;
    EXPECT_EQ(r.gaussian->normalized_by_replica[i], want);
  }
}

TEST(Runner, RankOnePicksTheRightNormalization) {
  ExperimentConfig cfg = small_gaussian_config();
  cfg.theorem = TheoremKind::RankOne;
  cfg.spectrum.emplace(std::vector<double>{2.0});
  cfg.N = 1000;
  cfg.M = 150;
  const ExperimentResult real_r = run(cfg);
  const Normalization want =
      normalization_fixed(*cfg.spectrum, cfg.N, ExtremalMode::MaxSigned);
  EXPECT_EQ(real_r.normalization.scale, want.scale);
  EXPECT_EQ(real_r.normalization.shift, want.shift);
  EXPECT_EQ(real_r.normalization.law.kind, LawKind::Gumbel);

  cfg.field = FieldKind::Complex;
  cfg.source = SourceSel::Haar;
  cfg.spectrum.emplace(std::vector<double>{1.0});
  const ExperimentResult cplx = run(cfg);
  EXPECT_EQ(cplx.normalization.scale, 1.0);
  EXPECT_EQ(cplx.normalization.shift, -std::log(1000.0));
  EXPECT_EQ(cplx.normalization.law.kind, LawKind::Gumbel);
}

TEST(Runner, DivergingRankResolvesTheProjectionRank) {
  ExperimentConfig cfg;
  cfg.theorem = TheoremKind::DivergingRank;
  cfg.source = SourceSel::Gaussian;
  cfg.alpha = 0.3;
  cfg.N = 300;
  cfg.M = 150;
  cfg.seed = 7;
  const ExperimentResult r = run(cfg);
  EXPECT_EQ(r.k_N, std::llround(std::pow(300.0, 0.3)));  // = 6
  EXPECT_EQ(r.normalization.scale, 1.0 / diverging_p(300, 0.3));
  EXPECT_EQ(r.normalization.convention, StatisticConvention::Gaussian);
  ASSERT_TRUE(r.gaussian.has_value());
  // All-ones projection spectrum: the exact finite-N reference exists.
  EXPECT_TRUE(r.gaussian->ks_vs_exact.has_value());
}

TEST(Runner, QueProducesRoughlyCenteredStatistics) {
  ExperimentConfig cfg;
  cfg.theorem = TheoremKind::QUE;
  cfg.source = SourceSel::Haar;
  cfg.spectrum.emplace(std::vector<double>{1.0, 1.0, 1.0});
  cfg.N = 200;
  cfg.M = 400;
  cfg.seed = 11;
  const ExperimentResult r = run(cfg);
  ASSERT_TRUE(r.haar.has_value());
  EXPECT_FALSE(r.haar->ks_vs_exact.has_value());
  EXPECT_EQ(r.normalization.law.kind, LawKind::Normal);
  const SummaryStats s = summary(r.haar->normalized);
  EXPECT_LT(std::abs(s.mean), 0.5);
}

TEST(Runner, CoupledSourcesShareTheGaussianBlock) {
  // source = both draws one Gaussian block per replica and feeds the same
  // block to both statistics, which is what makes the two-sample comparison
  // powerful at small M. The coupling forces haar ~ gaussian replica-wise.
  ExperimentConfig cfg = small_gaussian_config();
  cfg.source = SourceSel::Both;
  cfg.N = 800;
  cfg.M = 200;
  const ExperimentResult r = run(cfg);
  ASSERT_TRUE(r.haar && r.gaussian && r.ks_two_sample);
  double max_gap = 0.0;
  for (std::size_t i = 0; i < r.haar->raw_by_replica.size(); ++i)
    max_gap = std::max(max_gap, std::abs(r.haar->raw_by_replica[i] -
                                         r.gaussian->raw_by_replica[i]));
  // Replica-wise difference is the coupling error, far below the spread of
  // the statistic itself (~ 2 log N ~ 13).
  EXPECT_LT(max_gap, 3.0);
  EXPECT_GT(max_gap, 0.0);
}

TEST(Runner, DiagnosticsSummaryIsPopulated) {
  ExperimentConfig cfg = small_gaussian_config();
  cfg.source = SourceSel::Haar;
  cfg.spectrum.emplace(std::vector<double>{1.0, 1.0});
  cfg.diagnostics = true;
  cfg.N = 400;
  cfg.M = 120;
  const ExperimentResult r = run(cfg);
  ASSERT_TRUE(r.diagnostics_summary.has_value());
  const auto& d = *r.diagnostics_summary;
  EXPECT_GT(d.eps_N_k.median, 0.0);
  EXPECT_LE(d.eps_N_k.median, d.eps_N_k.q95);
  EXPECT_LE(d.eps_N_k.q95, d.eps_N_k.max);
  EXPECT_GT(d.max_L.median, 0.0);
  EXPECT_GT(d.max_delta.median, 0.0);
  EXPECT_LT(d.max_delta_gap.median, d.max_delta.median);
}

TEST(Runner, FiniteNLawHoldsAcrossSizes) {
  // Desk-scale version of the coupling theorem, bound to the exact finite-N
  // law instead of the slow Gumbel limit: KS(raw Haar sample, exact max law)
  // stays below 0.04 at every size.
  for (long long N : {500ll, 1000ll, 2000ll, 4000ll}) {
    ExperimentConfig cfg;
    cfg.theorem = TheoremKind::FixedRank;
    cfg.source = SourceSel::Haar;
    cfg.spectrum.emplace(std::vector<double>{1.0});
    cfg.N = N;
    cfg.M = 5000;
    cfg.seed = 90210;
    cfg.workers = 8;
    const ExperimentResult r = run(cfg);
    ASSERT_TRUE(r.haar && r.haar->ks_vs_exact.has_value());
    EXPECT_LT(*r.haar->ks_vs_exact, 0.04) << "N = " << N;
  }
}

TEST(Thresholds, GateOnConfiguredChecks) {
  ExperimentConfig cfg = small_gaussian_config();
  cfg.source = SourceSel::Both;
  cfg.N = 400;
  cfg.M = 200;
  cfg.check_two_sample_ks = 0.9;
  cfg.check_ks_vs_limit = 2.0;  // KS never reaches 2; always passes
  const ExperimentResult pass = run(cfg);
  EXPECT_TRUE(thresholds_ok(pass));

  cfg.check_two_sample_ks = 1e-9;
  const ExperimentResult fail = run(cfg);
  EXPECT_FALSE(thresholds_ok(fail));

  cfg.check_two_sample_ks.reset();
  cfg.check_ks_vs_limit = 1e-9;
  const ExperimentResult fail2 = run(cfg);
  EXPECT_FALSE(thresholds_ok(fail2));
}

TEST(Emit, CsvHasOneRowPerReplicaAndEchoesTheSeed) {
  // emit() is pure plumbing, so a hand-built three-replica result is enough.
  ExperimentConfig cfg;
  cfg.theorem = TheoremKind::FixedRank;
  cfg.source = SourceSel::Haar;
  cfg.spectrum.emplace(std::vector<double>{1.0});
  cfg.N = 100;
  cfg.M = 3;
  cfg.seed = 777;
  ExperimentResult r;
  r.config = cfg;
  r.k_N = 1;
  r.normalization = normalization_fixed(*cfg.spectrum, 100, ExtremalMode::MaxSigned);
  r.haar.emplace(std::vector<double>{8.0, 9.5, 11.0}, r.normalization);

  std::ostringstream out;
  emit(r, EmitFormat::Csv, out);
  const std::string text = out.str();
  EXPECT_NE(text.find("# seed = 777\n"), std::string::npos);
  EXPECT_NE(text.find("replica_index,raw_haar,normalized_haar\n"), std::string::npos);
  int data_rows = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#' && line.rfind("replica_index", 0) != 0)
      ++data_rows;
  EXPECT_EQ(data_rows, 3);
  EXPECT_NE(text.find("\n0,8,"), std::string::npos);
}

TEST(Emit, JsonRoundTripsScalarsBitExactly) {
  ExperimentConfig cfg = small_gaussian_config();
  cfg.source = SourceSel::Both;
  cfg.N = 300;
  cfg.M = 120;
  const ExperimentResult r = run(cfg);

  std::ostringstream out;
  emit(r, EmitFormat::Json, out);
  const nlohmann::json j = nlohmann::json::parse(out.str());

  EXPECT_EQ(j["config"]["n"].get<long long>(), r.config.N);
  EXPECT_EQ(j["config"]["m"].get<long long>(), r.config.M);
  EXPECT_EQ(j["config"]["seed"].get<std::uint64_t>(), r.config.seed);
  EXPECT_EQ(j["normalization"]["scale"].get<double>(), r.normalization.scale);
  EXPECT_EQ(j["normalization"]["shift"].get<double>(), r.normalization.shift);
  EXPECT_EQ(j["ks_two_sample"].get<double>(), *r.ks_two_sample);
  EXPECT_EQ(j["haar"]["ks_vs_limit"].get<double>(), r.haar->ks_vs_limit);
  const auto raw = j["haar"]["raw"].get<std::vector<double>>();
  ASSERT_EQ(raw.size(), r.haar->raw_by_replica.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    EXPECT_EQ(raw[i], r.haar->raw_by_replica[i]);
}

TEST(Emit, PlotdataGridIsMonotone) {
  ExperimentConfig cfg = small_gaussian_config();
  const ExperimentResult r = run(cfg);
  std::ostringstream out;
  emit(r, EmitFormat::Plotdata, out);

  std::istringstream lines(out.str());
  std::string line;
  double prev_x = -1e300, prev_e = -1.0;
  int rows = 0;
  bool seen_header = false;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == "x,ecdf,reference") {
      seen_header = true;
      continue;
    }
    double x, e, ref;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &e, &ref), 3);
    EXPECT_GT(x, prev_x);
    EXPECT_GE(e, prev_e);
    EXPECT_GE(ref, 0.0);
    EXPECT_LE(ref, 1.0);
    prev_x = x;
    prev_e = e;
    ++rows;
  }
  EXPECT_TRUE(seen_header);
  EXPECT_EQ(rows, 512);
}

TEST(VerifyConstants, AllItemsPass) {
  const VerifyReport rep = verify_constants();
  EXPECT_GT(rep.items.size(), 10u);
  for (const auto& item : rep.items)
    EXPECT_TRUE(item.pass) << item.name << " [" << item.detail << "]";
}
