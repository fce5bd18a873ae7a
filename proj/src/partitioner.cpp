#include "bsvd/partitioner.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "bsvd/errors.hpp"

namespace bsvd {
namespace {

Permutation descending_order(const std::vector<double>& key) {
  std::vector<std::size_t> map(key.size());
  std::iota(map.begin(), map.end(), 0);
  std::stable_sort(map.begin(), map.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return Permutation(std::move(map));
}

}  // namespace

PortraitResult ensure_portrait(const SparseTriplets& m) {
  if (m.rows() >= m.cols()) return {m, false};
  return {transpose(m), true};
}

SortPermutations sort_by_norms(const SparseTriplets& m) {
  return {descending_order(row_square_norms(m)), descending_order(col_square_norms(m))};
}

BlockPartition choose_cut(const SparseTriplets& sorted, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("choose_cut: fraction must lie in (0, 1)");
  const auto sq = col_square_norms(sorted);
  const double total = std::accumulate(sq.begin(), sq.end(), 0.0);
  const double goal = fraction * total;
  double prefix = 0.0;
  std::size_t k = 0;
  while (k < sq.size() && !(prefix >= goal && k > 0)) prefix += sq[k++];
  if (total == 0.0 || k >= sorted.cols() || k > sorted.rows()) {
    throw DegenerateCutError("choose_cut: the norm fraction needs every column");
  }
  return {k, k};
}

PartitionReport partition_report(const SparseTriplets& m, const BlockPartition& p) {
  p.validate(m.rows(), m.cols());
  const double total = frobenius_sq(m);
  const auto stats = [&](const std::string& name, const SparseTriplets& b) {
    BlockStats s;
    s.block = name;
    s.rows = b.rows();
    s.cols = b.cols();
    const double cells = static_cast<double>(b.rows()) * static_cast<double>(b.cols());
    s.density = cells > 0.0 ? static_cast<double>(b.nnz()) / cells : 0.0;
    s.square_norm = frobenius_sq(b);
    s.norm_percentage = total > 0.0 ? 100.0 * s.square_norm / total : 0.0;
    return s;
  };
  PartitionReport r;
  r.blocks.push_back(stats("11", extract_block(m, p, BlockId::k11)));
  r.blocks.push_back(stats("12", extract_block(m, p, BlockId::k12)));
  r.blocks.push_back(stats("21", extract_block(m, p, BlockId::k21)));
  r.blocks.push_back(stats("22", extract_block(m, p, BlockId::k22)));
  r.blocks.push_back(stats("whole", m));
  return r;
}

void write_partition_tsv(std::ostream& out, const PartitionReport& r) {
  out << "BLOCK\tROWS\tCOLUMNS\tDENSITY\tSQUARE NORM\tNORM PERCENTAGE\n";
  char buf[256];
  for (const auto& b : r.blocks) {
    std::snprintf(buf, sizeof buf, "%s\t%zu\t%zu\t%.2f%%\t%.17g\t%.2f%%\n", b.block.c_str(), b.rows, b.cols,
                  100.0 * b.density, b.square_norm, b.norm_percentage);
    out << buf;
  }
}

}  // namespace bsvd
