#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "bsvd/dense.hpp"
#include "bsvd/errors.hpp"
#include "bsvd/kernels.hpp"
#include "bsvd/memory.hpp"
#include "bsvd/sparse.hpp"
#include "test_helpers.hpp"

using namespace bsvd;
using testing_helpers::random_dense;
using testing_helpers::random_sparse;

namespace {

SparseTriplets parse(const std::string& text, bool one_based = false) {
  std::istringstream in(text);
  return parse_triplets(in, one_based);
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST(ParseTriplets, ReadsRowsAndInfersShape) {
  const auto m = parse("0,0,3\n1,0,4");
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 1u);
  ASSERT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.entries()[0], (Entry{0, 0, 3.0}));
  EXPECT_EQ(m.entries()[1], (Entry{1, 0, 4.0}));
}

TEST(ParseTriplets, CancellingDuplicatesLeaveNoEntry) {
  const auto m = parse("0,0,2\n0,0,-2");
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_EQ(m.cols(), 1u);
  EXPECT_EQ(m.nnz(), 0u);
}

TEST(ParseTriplets, OneBasedShift) {
  const auto m = parse("1,1,5", true);
  ASSERT_EQ(m.nnz(), 1u);
  EXPECT_EQ(m.entries()[0], (Entry{0, 0, 5.0}));
}

TEST(ParseTriplets, HeaderCommentsAndDuplicatesSummed) {
  const auto m = parse("%%dims 3 4\n# note\n\n2,3,1.5\n0,1,1\n2,3,0.5\n");
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 4u);
  ASSERT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.entries()[0], (Entry{0, 1, 1.0}));
  EXPECT_EQ(m.entries()[1], (Entry{2, 3, 2.0}));
}

TEST(ParseTriplets, MalformedLineReportsLineNumber) {
  try {
    parse("0,0,1\n# c\n1,x,2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("0,0\n"), ParseError);
  EXPECT_THROW(parse("0,0,1,2\n"), ParseError);
}

TEST(ParseTriplets, IndexBeyondDeclaredDims) {
  EXPECT_THROW(parse("%%dims 2 2\n2,0,1\n"), DimensionError);
  EXPECT_THROW(parse("%%dims 2 2\n0,0,1\n", true), DimensionError);
}

TEST(ParseTriplets, WriteReadRoundTrip) {
  std::mt19937_64 gen(11);
  const auto m = random_sparse(9, 7, 0.3, gen);
  std::stringstream io;
  write_triplets(io, m);
  EXPECT_EQ(parse_triplets(io, false), m);
}

TEST(FrobeniusSq, SmallCases) {
  EXPECT_DOUBLE_EQ(frobenius_sq(parse("0,0,3\n1,0,4")), 25.0);
  EXPECT_DOUBLE_EQ(frobenius_sq(SparseTriplets(3, 3, {})), 0.0);
}

TEST(FrobeniusSq, MatchesGramTrace) {
  std::mt19937_64 gen(1);
  const auto m = random_sparse(10, 6, 0.5, gen);
  const DenseMatrix d = to_dense(m);
  const double tr = trace(matmul_tn(d, d));
  EXPECT_NEAR(frobenius_sq(m), tr, 1e-12 * tr);
  const auto g = gram_blockwise(m, {3, 3});
  EXPECT_NEAR(frobenius_sq(m), g.trace11() + g.trace22(), 1e-12 * tr);
}

TEST(Norms, SmallCases) {
  const auto m = parse("0,0,3\n0,1,4");
  EXPECT_EQ(row_norms(m), std::vector<double>({5.0}));
  EXPECT_EQ(col_norms(m), std::vector<double>({3.0, 4.0}));
  const auto z = parse("%%dims 2 2\n0,0,1\n");
  EXPECT_EQ(row_norms(z)[1], 0.0);
}

TEST(Norms, SquaredSumsAgree) {
  std::mt19937_64 gen(2);
  const auto m = random_sparse(20, 7, 0.4, gen);
  const double f = frobenius_sq(m);
  EXPECT_NEAR(sum_sq(row_norms(m)), f, 1e-12 * f);
  EXPECT_NEAR(sum_sq(col_norms(m)), f, 1e-12 * f);
}

TEST(Permute, IdentityAndSwap) {
  const auto m = parse("0,0,1\n1,0,2");
  EXPECT_EQ(permute(m, Permutation::identity(2), Permutation::identity(1)), m);
  const auto s = permute(m, Permutation({1, 0}), Permutation::identity(1));
  EXPECT_EQ(s, parse("0,0,2\n1,0,1"));
}

TEST(Permute, FrobeniusInvariantAndSizeChecked) {
  std::mt19937_64 gen(3);
  const auto m = random_sparse(12, 9, 0.3, gen);
  std::vector<std::size_t> r(12), c(9);
  std::iota(r.begin(), r.end(), 0);
  std::iota(c.begin(), c.end(), 0);
  std::shuffle(r.begin(), r.end(), gen);
  std::shuffle(c.begin(), c.end(), gen);
  const auto p = permute(m, Permutation(r), Permutation(c));
  EXPECT_EQ(frobenius_sq(p), frobenius_sq(m));
  const DenseMatrix d = to_dense(m), dp = to_dense(p);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(dp(i, j), d(r[i], c[j]));
  EXPECT_THROW(permute(m, Permutation::identity(11), Permutation(c)), DimensionError);
}

TEST(PermutationType, RejectsNonBijection) {
  EXPECT_THROW(Permutation({0, 0}), UsageError);
  EXPECT_THROW(Permutation({0, 2}), UsageError);
  const Permutation p({2, 0, 1});
  const Permutation q = p.inverse();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(q[p[i]], i);
}

TEST(ExtractBlock, TwoByTwo) {
  const auto m = parse("0,0,1\n0,1,2\n1,0,3\n1,1,4");
  const BlockPartition p{1, 1};
  EXPECT_EQ(extract_block(m, p, BlockId::k11), parse("0,0,1"));
  EXPECT_EQ(extract_block(m, p, BlockId::k12), parse("0,0,2"));
  EXPECT_EQ(extract_block(m, p, BlockId::k21), parse("0,0,3"));
  EXPECT_EQ(extract_block(m, p, BlockId::k22), parse("0,0,4"));
}

TEST(ExtractBlock, BoundaryEntryGoesToBlock22) {
  const auto m = parse("%%dims 3 3\n1,1,7\n");
  const auto b22 = extract_block(m, {1, 1}, BlockId::k22);
  EXPECT_EQ(b22.rows(), 2u);
  ASSERT_EQ(b22.nnz(), 1u);
  EXPECT_EQ(b22.entries()[0], (Entry{0, 0, 7.0}));
  EXPECT_THROW(block_id_from_int(13), UsageError);
  EXPECT_EQ(block_id_from_int(21), BlockId::k21);
}

TEST(ExtractBlock, BlocksPartitionTheNorm) {
  std::mt19937_64 gen(4);
  const auto m = random_sparse(30, 20, 0.2, gen);
  const BlockPartition p{8, 8};
  double s = 0.0;
  for (auto id : {BlockId::k11, BlockId::k12, BlockId::k21, BlockId::k22}) s += frobenius_sq(extract_block(m, p, id));
  EXPECT_NEAR(s, frobenius_sq(m), 1e-12 * frobenius_sq(m));
}

TEST(GramBlockwise, Identity) {
  const auto m = parse("0,0,1\n1,1,1\n2,2,1");
  const auto g = gram_blockwise(m, {2, 2});
  EXPECT_EQ(max_abs_diff(g.g11, DenseMatrix::identity(2)), 0.0);
  EXPECT_EQ(max_abs(g.g12), 0.0);
  EXPECT_EQ(max_abs_diff(g.g22, DenseMatrix::identity(1)), 0.0);
}

TEST(GramBlockwise, MatchesDenseProduct) {
  std::mt19937_64 gen(5);
  const auto m = random_sparse(40, 12, 0.3, gen);
  const DenseMatrix d = to_dense(m);
  const DenseMatrix g = matmul_tn(d, d);
  const auto b = gram_blockwise(m, {5, 5});
  const double scale = max_abs(g);
  EXPECT_LE(max_abs_diff(b.g11, g.block(0, 0, 5, 5)), 1e-10 * scale);
  EXPECT_LE(max_abs_diff(b.g12, g.block(0, 5, 5, 7)), 1e-10 * scale);
  EXPECT_LE(max_abs_diff(b.g22, g.block(5, 5, 7, 7)), 1e-10 * scale);
  EXPECT_LE(max_abs_diff(b.g11, transpose(b.g11)), 1e-13);
  EXPECT_LE(max_abs_diff(b.g22, transpose(b.g22)), 1e-13);
  EXPECT_NEAR(b.trace11() + b.trace22(), frobenius_sq(m), 1e-10 * frobenius_sq(m));
}

TEST(GramBlockwise, BudgetFallbackAndError) {
  std::mt19937_64 gen(6);
  const auto m = random_sparse(40, 12, 0.3, gen);
  // G11 + G12 = 2·2 + 2·10 doubles fit, G22 (100 doubles) does not.
  const auto b = gram_blockwise(m, {2, 2}, (4 + 20 + 50) * sizeof(double));
  EXPECT_TRUE(b.g22_diagonal_only);
  EXPECT_EQ(b.g22_diagonal.size(), 10u);
  EXPECT_NEAR(b.trace11() + b.trace22(), frobenius_sq(m), 1e-10 * frobenius_sq(m));
  try {
    gram_blockwise(m, {2, 2}, 10 * sizeof(double));
    FAIL();
  } catch (const MemoryBudgetError& e) {
    EXPECT_TRUE(e.block() == "G11" || e.block() == "G12");
  }
}

TEST(Matmul, SmallCases) {
  std::mt19937_64 gen(7);
  const DenseMatrix a = random_dense(4, 3, gen);
  EXPECT_EQ(max_abs_diff(matmul(DenseMatrix::identity(4), a), a), 0.0);
  const auto p = matmul(DenseMatrix::from_rows({{1, 2}}), DenseMatrix::from_rows({{3}, {4}}));
  EXPECT_EQ(p(0, 0), 11.0);
  EXPECT_THROW(matmul(a, a), DimensionError);
}

TEST(Matmul, TripleLoopOracleAndTranspose) {
  std::mt19937_64 gen(8);
  const DenseMatrix a = random_dense(5, 4, gen);
  const DenseMatrix b = random_dense(4, 3, gen);
  const DenseMatrix c = matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-13);
    }
  EXPECT_LE(max_abs_diff(transpose(c), matmul(transpose(b), transpose(a))), 1e-13);
  EXPECT_LE(max_abs_diff(matmul_tn(transpose(a), b), c), 1e-13);
  EXPECT_LE(max_abs_diff(matmul_nt(a, transpose(b)), c), 1e-13);
}

TEST(DenseMatrixType, RejectsBadValues) {
  const double bad[] = {1.0, std::nan("")};
  EXPECT_THROW(DenseMatrix(1, 2, bad), UsageError);
  EXPECT_THROW(DenseMatrix(1, 3, bad), DimensionError);
}

TEST(Kernels, ParallelMatchesSerialBitForBit) {
  std::mt19937_64 gen(9);
  const DenseMatrix a = random_dense(300, 80, gen);
  const DenseMatrix b = random_dense(80, 120, gen);
  const DenseMatrix c = random_dense(300, 120, gen);
  EXPECT_EQ(max_abs_diff(kernels::serial::gemm_nn(a, b), kernels::parallel::gemm_nn(a, b)), 0.0);
  EXPECT_EQ(max_abs_diff(kernels::serial::gemm_tn(a, c), kernels::parallel::gemm_tn(a, c)), 0.0);
  EXPECT_EQ(max_abs_diff(kernels::serial::gemm_nt(c, b), kernels::parallel::gemm_nt(c, b)), 0.0);
  const auto s = random_sparse(500, 200, 0.02, gen);
  const auto t = random_sparse(500, 150, 0.02, gen);
  const DenseMatrix v = random_dense(200, 30, gen);
  EXPECT_EQ(max_abs_diff(kernels::serial::sparse_dense(s.entries(), 500, v),
                         kernels::parallel::sparse_dense(s.entries(), 500, v)),
            0.0);
  EXPECT_EQ(max_abs_diff(kernels::serial::sparse_tn_sparse(s.entries(), 200, t.entries(), 150, 500),
                         kernels::parallel::sparse_tn_sparse(s.entries(), 200, t.entries(), 150, 500)),
            0.0);
}

TEST(Memory, TracksPeakAndEnforcesBudget) {
  memory::reset_peak();
  const auto before = memory::stats().live_bytes;
  {
    DenseMatrix a(100, 100);
    EXPECT_EQ(memory::stats().live_bytes, before + 100 * 100 * sizeof(double));
  }
  EXPECT_EQ(memory::stats().live_bytes, before);
  EXPECT_GE(memory::stats().peak_bytes, before + 100 * 100 * sizeof(double));
  EXPECT_EQ(memory::stats().largest_allocation, 100 * 100 * sizeof(double));
  const memory::BudgetScope scope(before + 1000 * sizeof(double));
  EXPECT_NO_THROW(DenseMatrix(10, 100));
  EXPECT_THROW(DenseMatrix(10, 101), MemoryBudgetError);
}
