#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "bsvd/errors.hpp"
#include "bsvd/partitioner.hpp"
#include "test_helpers.hpp"

using namespace bsvd;
using testing_helpers::random_sparse;

TEST(Portrait, TallStays) {
  const SparseTriplets m(3, 2, {{0, 0, 1.0}, {2, 1, 2.0}});
  const auto p = ensure_portrait(m);
  EXPECT_FALSE(p.transposed);
  EXPECT_EQ(p.matrix, m);
}

TEST(Portrait, WideIsTransposed) {
  const SparseTriplets m(2, 3, {{0, 2, 1.0}, {1, 0, 2.0}});
  const auto p = ensure_portrait(m);
  EXPECT_TRUE(p.transposed);
  EXPECT_EQ(p.matrix.rows(), 3u);
  EXPECT_EQ(p.matrix, SparseTriplets(3, 2, {{2, 0, 1.0}, {0, 1, 2.0}}));
}

TEST(Portrait, SquareStays) {
  EXPECT_FALSE(ensure_portrait(SparseTriplets(2, 2, {{0, 1, 1.0}})).transposed);
}

TEST(SortByNorms, TwoColumns) {
  // Column 0 has norm 2, column 1 has norm 3.
  const SparseTriplets m(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
  const auto s = sort_by_norms(m);
  EXPECT_EQ(s.col_p.map(), (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(s.row_p.map(), (std::vector<std::size_t>{1, 0}));
}

TEST(SortByNorms, TiesKeepOrder) {
  const SparseTriplets m(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  const auto s = sort_by_norms(m);
  EXPECT_EQ(s.col_p, Permutation::identity(3));
  EXPECT_EQ(s.row_p, Permutation::identity(3));
}

TEST(SortByNorms, RandomIsSorted) {
  std::mt19937_64 gen(70);
  const SparseTriplets m = random_sparse(60, 25, 0.2, gen);
  const auto s = sort_by_norms(m);
  const SparseTriplets sorted = permute(m, s.row_p, s.col_p);
  const auto c = col_square_norms(sorted);
  const auto r = row_square_norms(sorted);
  for (std::size_t j = 1; j < c.size(); ++j) EXPECT_GE(c[j - 1], c[j]);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GE(r[i - 1], r[i]);
  EXPECT_NEAR(frobenius_sq(sorted), frobenius_sq(m), 1e-12 * frobenius_sq(m));
}

TEST(ChooseCut, DominantColumn) {
  // Square column norms 8, 1, 1: 8/10 reaches two thirds.
  const SparseTriplets m(3, 3, {{0, 0, std::sqrt(8.0)}, {1, 1, 1.0}, {2, 2, 1.0}});
  const auto p = choose_cut(m, 2.0 / 3.0);
  EXPECT_EQ(p.col_cut, 1u);
  EXPECT_EQ(p.row_cut, 1u);
}

TEST(ChooseCut, UniformHalf) {
  std::vector<Entry> e;
  for (std::size_t j = 0; j < 10; ++j) e.push_back({j, j, 1.0});
  const SparseTriplets m(12, 10, e);
  EXPECT_EQ(choose_cut(m, 0.5).col_cut, 5u);
}

TEST(ChooseCut, Degenerate) {
  const SparseTriplets one(3, 1, {{0, 0, 1.0}});
  EXPECT_THROW(choose_cut(one, 0.5), DegenerateCutError);
  EXPECT_THROW(choose_cut(SparseTriplets(3, 3, {}), 0.5), DegenerateCutError);
  const SparseTriplets m(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  EXPECT_THROW(choose_cut(m, 0.9), DegenerateCutError);
  EXPECT_THROW(choose_cut(m, 0.0), UsageError);
  EXPECT_THROW(choose_cut(m, 1.0), UsageError);
}

TEST(ChooseCut, MonotoneInFraction) {
  std::mt19937_64 gen(71);
  const SparseTriplets m = random_sparse(200, 40, 0.1, gen);
  const auto s = sort_by_norms(m);
  const SparseTriplets sorted = permute(m, s.row_p, s.col_p);
  std::size_t prev = 0;
  for (double f = 0.05; f < 0.9; f += 0.05) {
    const auto p = choose_cut(sorted, f);
    EXPECT_GE(p.col_cut, prev);
    prev = p.col_cut;
    const auto c = col_square_norms(sorted);
    const double lead = std::accumulate(c.begin(), c.begin() + static_cast<long>(p.col_cut), 0.0);
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    EXPECT_GE(lead, f * total);
    if (p.col_cut > 1) {
      EXPECT_LT(lead - c[p.col_cut - 1], f * total);
    }
  }
}

TEST(PartitionReport, Identity) {
  const SparseTriplets m(4, 4, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}});
  const auto r = partition_report(m, BlockPartition{2, 2});
  ASSERT_EQ(r.blocks.size(), 5u);
  const double dens[] = {0.5, 0.0, 0.0, 0.5, 0.25};
  const double pct[] = {50.0, 0.0, 0.0, 50.0, 100.0};
  const char* names[] = {"11", "12", "21", "22", "whole"};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.blocks[i].block, names[i]);
    EXPECT_DOUBLE_EQ(r.blocks[i].density, dens[i]);
    EXPECT_DOUBLE_EQ(r.blocks[i].norm_percentage, pct[i]);
  }
  EXPECT_EQ(r.blocks[1].rows, 2u);
  EXPECT_EQ(r.blocks[4].cols, 4u);
}

TEST(PartitionReport, RandomPercentagesSum) {
  std::mt19937_64 gen(72);
  const SparseTriplets m = random_sparse(50, 20, 0.3, gen);
  const auto r = partition_report(m, BlockPartition{7, 7});
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sum += r.blocks[i].norm_percentage;
  EXPECT_NEAR(sum, 100.0, 1e-10);
  EXPECT_EQ(r.blocks[3].rows, 43u);
  EXPECT_EQ(r.blocks[3].cols, 13u);
}

TEST(PartitionTsv, HeaderAndRow) {
  const SparseTriplets m(4, 4, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}});
  std::ostringstream out;
  write_partition_tsv(out, partition_report(m, BlockPartition{2, 2}));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "BLOCK\tROWS\tCOLUMNS\tDENSITY\tSQUARE NORM\tNORM PERCENTAGE");
  std::getline(in, line);
  EXPECT_EQ(line, "11\t2\t2\t50.00%\t2\t50.00%");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5u);
}
