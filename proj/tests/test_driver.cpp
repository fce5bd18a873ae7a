#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bsvd/baseline_svd.hpp"
#include "bsvd/driver.hpp"
#include "bsvd/errors.hpp"
#include "test_helpers.hpp"

using namespace bsvd;
using testing_helpers::random_sparse;
using testing_helpers::rel;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bsvd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ‖A·v − u·d‖ relative to ‖A‖ in the input frame.
double factor_residual(const SparseTriplets& a, const DecomposeResult& r) {
  const DenseMatrix av = multiply(a, r.v_slice);
  const DenseMatrix ud = scale_columns(r.u_slice, r.singular_values.values());
  return frobenius_norm(av - ud) / std::sqrt(frobenius_sq(a));
}

SparseTriplets diagonal_input() {
  return SparseTriplets(6, 5, {{0, 0, 3.0}, {1, 1, 5.0}, {2, 2, 1.0}, {3, 3, 4.0}, {4, 4, 2.0}});
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BSVD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string fixture(const std::string& name) { return std::string(BSVD_FIXTURES) + "/" + name; }

std::map<std::string, std::string> read_kv(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && !kv.count(line.substr(0, eq))) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST(RunConfig, Validate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.fraction = 1.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = {};
  c.ratio_tol = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = {};
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Decompose, DiagonalInput) {
  const SparseTriplets a = diagonal_input();
  const auto r = run_decompose(a, RunConfig{});
  EXPECT_EQ(r.provenance.method, "block");
  // Square norms 25, 16, 9, 4, 1: two columns carry two thirds.
  EXPECT_EQ(r.provenance.partition.col_cut, 2u);
  ASSERT_EQ(r.singular_values.size(), 2u);
  EXPECT_NEAR(r.singular_values[0], 5.0, 1e-14);
  EXPECT_NEAR(r.singular_values[1], 4.0, 1e-14);
  ASSERT_EQ(r.iteration_log.size(), 1u);
  EXPECT_EQ(r.iteration_log[0].nondiag, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(factor_residual(a, r), 1e-14);
  EXPECT_NEAR(std::abs(r.v_slice(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(r.u_slice(3, 1)), 1.0, 1e-14);
}

TEST(Baseline, DiagonalAndEmpty) {
  const auto r = run_baseline(diagonal_input(), RunConfig{});
  EXPECT_EQ(r.singular_values.values(), (std::vector<double>{5, 4, 3, 2, 1}));
  EXPECT_EQ(r.provenance.method, "baseline");
  const auto e = run_baseline(SparseTriplets(4, 0, {}), RunConfig{});
  EXPECT_TRUE(e.singular_values.empty());
}

TEST(Baseline, RandomMatchesDense) {
  std::mt19937_64 gen(80);
  const SparseTriplets a = random_sparse(50, 20, 0.3, gen);
  const auto r = run_baseline(a, RunConfig{});
  const auto d = svd_dense(to_dense(a)).d;
  ASSERT_EQ(r.singular_values.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(r.singular_values[i], d[i], 1e-10 * d[0]);
  EXPECT_LE(factor_residual(a, r), 1e-12);
}

TEST(Baseline, BudgetGate) {
  std::mt19937_64 gen(81);
  RunConfig cfg;
  cfg.budget_bytes = 64;
  EXPECT_THROW(run_baseline(random_sparse(50, 20, 0.3, gen), cfg), MemoryBudgetError);
}

TEST(AssembleEconomy, IdentityAndRandom) {
  const SparseTriplets a(3, 2, {{0, 0, 2.0}, {1, 1, 1.0}});
  const DenseMatrix u = assemble_economy(a, BlockPartition{1, 1}, DenseMatrix::identity(2), DiagonalMatrix({2.0, 1.0}));
  EXPECT_LE(max_abs_diff(u, DenseMatrix::from_rows({{1, 0}, {0, 1}, {0, 0}})), 0.0);
  EXPECT_THROW(assemble_economy(a, BlockPartition{1, 1}, DenseMatrix::identity(2), DiagonalMatrix({2.0, 0.0})),
               RankError);
  std::mt19937_64 gen(82);
  const SparseTriplets b = random_sparse(30, 10, 0.4, gen);
  const auto s = svd_dense(to_dense(b));
  const DenseMatrix ub = assemble_economy(b, BlockPartition{4, 4}, s.v_slice, s.d);
  EXPECT_LE(frobenius_norm(matmul(to_dense(b), s.v_slice) - scale_columns(ub, s.d.values())), 1e-12 * s.d[0]);
}

TEST(Decompose, RandomSparseAgreesWithBaseline) {
  std::mt19937_64 gen(83);
  const SparseTriplets a = random_sparse(300, 60, 0.08, gen);
  const auto block = run_decompose(a, RunConfig{});
  const auto base = run_baseline(a, RunConfig{});
  ASSERT_EQ(block.provenance.method, "block");
  ASSERT_TRUE(block.converged);
  const auto rep = compare(block, base);
  EXPECT_EQ(rep.k, block.singular_values.size());
  EXPECT_LE(rep.max_rel(std::min<std::size_t>(4, rep.k)), 1e-6);
  EXPECT_LE(factor_residual(a, block), 1e-10);
  EXPECT_LE(orthogonality_defect(block.v_slice), 1e-10);
  EXPECT_LE(orthogonality_defect(block.u_slice), 1e-8);
  EXPECT_LE(block.memory.peak_bytes, block.budget_bytes);
}

TEST(Decompose, WideInputIsTransposedBack) {
  std::mt19937_64 gen(84);
  const SparseTriplets a = random_sparse(40, 120, 0.1, gen);
  const auto r = run_decompose(a, RunConfig{});
  EXPECT_TRUE(r.provenance.transposed);
  EXPECT_EQ(r.u_slice.rows(), 40u);
  EXPECT_EQ(r.v_slice.rows(), 120u);
  EXPECT_LE(factor_residual(a, r), 1e-10);
}

TEST(Decompose, DegenerateCutFallsBack) {
  const SparseTriplets a(4, 1, {{0, 0, 1.0}, {2, 0, 2.0}});
  const auto r = run_decompose(a, RunConfig{});
  EXPECT_EQ(r.provenance.method, "baseline");
  ASSERT_FALSE(r.provenance.notes.empty());
  EXPECT_NEAR(r.singular_values[0], std::sqrt(5.0), 1e-14);
}

TEST(Decompose, IterationLimitKeepsFactors) {
  std::mt19937_64 gen(85);
  const SparseTriplets a = random_sparse(200, 40, 0.1, gen);
  RunConfig cfg;
  cfg.max_iters = 1;
  const auto r = run_decompose(a, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iteration_log.back().iteration, 1u);
  EXPECT_LE(factor_residual(a, r), 1e-10);
}

TEST(Decompose, Deterministic) {
  std::mt19937_64 gen(86);
  const SparseTriplets a = random_sparse(150, 30, 0.1, gen);
  const auto r1 = run_decompose(a, RunConfig{});
  const auto r2 = run_decompose(a, RunConfig{});
  EXPECT_EQ(r1.singular_values.values(), r2.singular_values.values());
  ASSERT_EQ(r1.iteration_log.size(), r2.iteration_log.size());
  for (std::size_t i = 0; i < r1.iteration_log.size(); ++i) {
    EXPECT_EQ(r1.iteration_log[i].trace11, r2.iteration_log[i].trace11);
    EXPECT_EQ(r1.iteration_log[i].nondiag, r2.iteration_log[i].nondiag);
  }
}

TEST(Compare, Cases) {
  const auto r = run_baseline(diagonal_input(), RunConfig{});
  const auto same = compare(r, r);
  EXPECT_EQ(same.k, 5u);
  EXPECT_EQ(same.max_rel(), 0.0);
  EXPECT_THROW(compare(r, r, 6), UsageError);
  // Row and column order do not change the spectrum.
  const SparseTriplets shuffled = permute(diagonal_input(), Permutation({5, 3, 1, 0, 2, 4}), Permutation({4, 2, 0, 3, 1}));
  const auto p = compare(r, run_baseline(shuffled, RunConfig{}), 3);
  EXPECT_EQ(p.k, 3u);
  EXPECT_LE(p.max_rel(), 1e-15);
}

TEST(GenSynthetic, ShapeDensityDeterminism) {
  const auto full = gen_synthetic(2, 2, 1.0, 1.1, 1);
  EXPECT_EQ(full.nnz(), 4u);
  const auto a = gen_synthetic(500, 100, 0.02, 1.1, 9);
  const auto b = gen_synthetic(500, 100, 0.02, 1.1, 9);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, gen_synthetic(500, 100, 0.02, 1.1, 10));
  for (const auto& e : a.entries()) {
    EXPECT_GE(e.value, 1.0);
    EXPECT_EQ(e.value, std::floor(e.value));
  }
  EXPECT_NEAR(static_cast<double>(a.nnz()) / 50000.0, 0.02, 0.005);
  EXPECT_THROW(gen_synthetic(5, 5, 0.0, 1.1, 1), UsageError);
}

TEST(GenSynthetic, SkewedCut) {
  const auto a = gen_synthetic(2000, 400, 0.005, 1.1, 42);
  const auto s = sort_by_norms(a);
  const auto p = choose_cut(permute(a, s.row_p, s.col_p), 2.0 / 3.0);
  EXPECT_LT(p.col_cut, 80u);
}

TEST(IterationsTsv, Format) {
  std::ostringstream out;
  write_iterations_tsv(out, {IterationRecord{1, 2.5, 1.5, 0.25, 0.0, 2.0, false}});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "ITER\tTRACE11\tTRACE22\tNONDIAG\tSECONDS");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("1\t2.5\t1.5\t0.25\t", 0), 0u);
}

TEST(WriteOutputs, FilesAndProvenance) {
  const fs::path dir = scratch_dir("outputs");
  RunConfig cfg;
  cfg.input = fixture("small.csv");
  cfg.full = true;
  const auto r = run_decompose(cfg);
  write_outputs(r, cfg, dir);
  for (const char* f : {"singular_values.txt", "u_slice.csv", "v_slice.csv", "iterations.tsv", "partition.tsv",
                        "provenance.txt", "full_spectrum.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  std::ifstream sv(dir / "singular_values.txt");
  std::vector<double> vals;
  for (double x; sv >> x;) vals.push_back(x);
  EXPECT_EQ(vals, r.singular_values.values());

  const auto kv = read_kv(dir / "provenance.txt");
  EXPECT_EQ(kv.at("method"), "block");
  EXPECT_EQ(kv.at("transposed"), "false");
  EXPECT_EQ(std::stoul(kv.at("col_cut")), r.provenance.partition.col_cut);
  std::istringstream perm(kv.at("col_permutation"));
  std::vector<std::size_t> cols;
  for (std::size_t x; perm >> x;) cols.push_back(x);
  EXPECT_EQ(Permutation(cols), r.provenance.col_p);

  // The full blockwise spectrum is the whole spectrum; the dominant values
  // lead it, the lowest four of them only to the looser tolerance.
  const auto base = run_baseline(cfg);
  ASSERT_EQ(r.full_spectrum.size(), base.singular_values.size());
  for (std::size_t i = 0; i < r.full_spectrum.size(); ++i)
    EXPECT_NEAR(r.full_spectrum[i], base.singular_values[i], 1e-10 * base.singular_values[0]);
  const std::size_t k = r.singular_values.size();
  for (std::size_t i = 0; i < k; ++i)
    EXPECT_LE(rel(r.singular_values[i], r.full_spectrum[i]), i + 4 < k ? 1e-8 : 1e-4) << i;
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const std::string out = " --out-dir " + dir.string();
  EXPECT_EQ(run_cli("decompose --input " + fixture("small.csv") + out), 0);
  EXPECT_TRUE(fs::exists(dir / "singular_values.txt"));
  EXPECT_EQ(run_cli("baseline --input " + fixture("small.csv") + out), 0);
  EXPECT_EQ(run_cli("stats --input " + fixture("small.csv")), 0);
  EXPECT_EQ(run_cli("compare --input " + fixture("small.csv")), 0);
  EXPECT_EQ(run_cli("decompose --one-based --input " + fixture("wide_one_based.csv") + out), 0);
  EXPECT_EQ(run_cli("gen-synthetic --rows 30 --cols 10 --output " + (dir / "g.csv").string()), 0);
  EXPECT_EQ(run_cli("decompose --input " + (dir / "g.csv").string() + out), 0);

  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("decompose --input " + fixture("small.csv")), 1);
  EXPECT_EQ(run_cli("decompose --fraction 1.5 --input " + fixture("small.csv") + out), 1);
  EXPECT_EQ(run_cli("decompose --input " + fixture("malformed.csv") + out), 3);
  EXPECT_EQ(run_cli("decompose --input " + fixture("missing.csv") + out), 3);
  EXPECT_EQ(run_cli("decompose --max-iters 1 --ratio-tol 1e-12 --input " + fixture("small.csv") + out), 2);
  EXPECT_EQ(run_cli("decompose --budget-bytes 8 --input " + fixture("small.csv") + out), 4);
  fs::remove_all(dir);
}
