#include "bsvd/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "bsvd/errors.hpp"
#include "bsvd/kernels.hpp"

namespace bsvd {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

SparseTriplets::SparseTriplets(std::size_t rows, std::size_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols) {
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) {
      throw DimensionError("triplet (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(e.value)) throw UsageError("triplet value is not finite");
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size();) {
    Entry merged = entries[i];
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].row == merged.row && entries[j].col == merged.col) {
      merged.value += entries[j].value;
      ++j;
    }
    if (merged.value != 0.0) entries_.push_back(merged);
    i = j;
  }
}

Permutation::Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t v : map_) {
    if (v >= map_.size() || seen[v]) throw UsageError("Permutation: map is not a bijection");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = i;
  return Permutation(std::move(map));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv));
}

void BlockPartition::validate(std::size_t rows, std::size_t cols) const {
  if (row_cut == 0 || row_cut > rows || col_cut == 0 || col_cut > cols) {
    throw DimensionError("BlockPartition (" + std::to_string(row_cut) + "," + std::to_string(col_cut) +
                         ") invalid for " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

BlockId block_id_from_int(int id) {
  switch (id) {
    case 11: return BlockId::k11;
    case 12: return BlockId::k12;
    case 21: return BlockId::k21;
    case 22: return BlockId::k22;
    default: throw UsageError("invalid block id " + std::to_string(id));
  }
}

SparseTriplets parse_triplets(std::istream& in, bool one_based) {
  std::vector<Entry> entries;
  bool have_dims = false;
  std::size_t dim_rows = 0, dim_cols = 0;
  std::size_t max_row = 0, max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;

    if (text.starts_with("%%dims")) {
      if (seen_content) throw ParseError(line_no, "%%dims must precede all triplets");
      std::string_view rest = trim(text.substr(6));
      const auto split = rest.find_first_of(" \t");
      if (split == std::string_view::npos || !parse_number(rest.substr(0, split), dim_rows) ||
          !parse_number(rest.substr(split + 1), dim_cols)) {
        throw ParseError(line_no, "malformed %%dims header");
      }
      have_dims = true;
      seen_content = true;
      continue;
    }
    seen_content = true;

    const auto c1 = text.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
    if (c2 == std::string_view::npos || text.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected row,col,value");
    }
    long long r = 0, c = 0;
    double v = 0.0;
    if (!parse_number(text.substr(0, c1), r) || !parse_number(text.substr(c1 + 1, c2 - c1 - 1), c) ||
        !parse_number(text.substr(c2 + 1), v)) {
      throw ParseError(line_no, "expected row,col,value");
    }
    if (!std::isfinite(v)) throw ParseError(line_no, "value is not finite");
    if (one_based) {
      --r;
      --c;
    }
    if (r < 0 || c < 0) {
      throw DimensionError("line " + std::to_string(line_no) + ": index below " + (one_based ? "1" : "0"));
    }
    const auto row = static_cast<std::size_t>(r);
    const auto col = static_cast<std::size_t>(c);
    if (have_dims && (row >= dim_rows || col >= dim_cols)) {
      throw DimensionError("line " + std::to_string(line_no) + ": index exceeds declared dims");
    }
    max_row = std::max(max_row, row + 1);
    max_col = std::max(max_col, col + 1);
    entries.push_back({row, col, v});
  }
  if (!have_dims) {
    dim_rows = max_row;
    dim_cols = max_col;
  }
  return SparseTriplets(dim_rows, dim_cols, std::move(entries));
}

SparseTriplets read_triplets_file(const std::string& path, bool one_based) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_triplets(in, one_based);
}

void write_triplets(std::ostream& out, const SparseTriplets& m) {
  out << "%%dims " << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (const auto& e : m.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out << e.row << ',' << e.col << ',' << buf << '\n';
  }
}

double frobenius_sq(const SparseTriplets& m) {
  double s = 0.0;
  for (const auto& e : m.entries()) s += e.value * e.value;
  return s;
}

std::vector<double> row_square_norms(const SparseTriplets& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (const auto& e : m.entries()) out[e.row] += e.value * e.value;
  return out;
}

std::vector<double> col_square_norms(const SparseTriplets& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (const auto& e : m.entries()) out[e.col] += e.value * e.value;
  return out;
}

std::vector<double> row_norms(const SparseTriplets& m) {
  auto out = row_square_norms(m);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

std::vector<double> col_norms(const SparseTriplets& m) {
  auto out = col_square_norms(m);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

SparseTriplets permute(const SparseTriplets& m, const Permutation& row_p, const Permutation& col_p) {
  if (row_p.size() != m.rows() || col_p.size() != m.cols()) {
    throw DimensionError("permute: permutation size does not match matrix");
  }
  const Permutation rinv = row_p.inverse();
  const Permutation cinv = col_p.inverse();
  std::vector<Entry> out;
  out.reserve(m.nnz());
  for (const auto& e : m.entries()) out.push_back({rinv[e.row], cinv[e.col], e.value});
  return SparseTriplets(m.rows(), m.cols(), std::move(out));
}

SparseTriplets transpose(const SparseTriplets& m) {
  std::vector<Entry> out;
  out.reserve(m.nnz());
  for (const auto& e : m.entries()) out.push_back({e.col, e.row, e.value});
  return SparseTriplets(m.cols(), m.rows(), std::move(out));
}

SparseTriplets extract_block(const SparseTriplets& m, const BlockPartition& p, BlockId which) {
  p.validate(m.rows(), m.cols());
  const int id = static_cast<int>(which);
  if (id != 11 && id != 12 && id != 21 && id != 22) throw UsageError("extract_block: invalid block id");
  const bool lower = id / 10 == 2;
  const bool right = id % 10 == 2;
  const std::size_t r0 = lower ? p.row_cut : 0;
  const std::size_t c0 = right ? p.col_cut : 0;
  const std::size_t nr = lower ? m.rows() - p.row_cut : p.row_cut;
  const std::size_t nc = right ? m.cols() - p.col_cut : p.col_cut;
  std::vector<Entry> out;
  for (const auto& e : m.entries()) {
    if ((e.row >= p.row_cut) == lower && (e.col >= p.col_cut) == right) {
      out.push_back({e.row - r0, e.col - c0, e.value});
    }
  }
  return SparseTriplets(nr, nc, std::move(out));
}

DenseMatrix to_dense(const SparseTriplets& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (const auto& e : m.entries()) out(e.row, e.col) = e.value;
  return out;
}

SparseTriplets from_dense(const DenseMatrix& a) {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) out.push_back({i, j, a(i, j)});
  return SparseTriplets(a.rows(), a.cols(), std::move(out));
}

DenseMatrix multiply(const SparseTriplets& m, const DenseMatrix& b) {
  if (m.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  return kernels::parallel::sparse_dense(m.entries(), m.rows(), b);
}

DenseMatrix multiply_tn(const SparseTriplets& x, const SparseTriplets& y) {
  if (x.rows() != y.rows()) throw DimensionError("multiply_tn: row counts differ");
  return kernels::parallel::sparse_tn_sparse(x.entries(), x.cols(), y.entries(), y.cols(), x.rows());
}

double GramBlocks::trace11() const { return trace(g11); }

double GramBlocks::trace22() const {
  if (!g22_diagonal_only) return trace(g22);
  double s = 0.0;
  for (double v : g22_diagonal) s += v;
  return s;
}

GramBlocks gram_blockwise(const SparseTriplets& m, const BlockPartition& p, std::size_t budget_bytes) {
  p.validate(m.rows(), m.cols());
  const std::size_t k = p.col_cut;
  const std::size_t rest = m.cols() - k;
  const std::size_t bytes11 = k * k * sizeof(double);
  const std::size_t bytes12 = k * rest * sizeof(double);
  const std::size_t bytes22 = rest * rest * sizeof(double);
  if (bytes11 > budget_bytes) throw MemoryBudgetError("G11", bytes11, budget_bytes);
  if (bytes11 + bytes12 > budget_bytes) throw MemoryBudgetError("G12", bytes11 + bytes12, budget_bytes);

  const auto a11 = extract_block(m, p, BlockId::k11);
  const auto a12 = extract_block(m, p, BlockId::k12);
  const auto a21 = extract_block(m, p, BlockId::k21);
  const auto a22 = extract_block(m, p, BlockId::k22);

  GramBlocks g;
  g.g11 = multiply_tn(a11, a11);
  g.g11 += multiply_tn(a21, a21);
  g.g12 = multiply_tn(a11, a12);
  g.g12 += multiply_tn(a21, a22);
  if (bytes11 + bytes12 + bytes22 <= budget_bytes) {
    g.g22 = multiply_tn(a12, a12);
    g.g22 += multiply_tn(a22, a22);
    g.g22_diagonal.resize(rest);
    for (std::size_t i = 0; i < rest; ++i) g.g22_diagonal[i] = g.g22(i, i);
  } else {
    g.g22_diagonal_only = true;
    g.g22_diagonal.assign(rest, 0.0);
    for (const auto& e : a12.entries()) g.g22_diagonal[e.col] += e.value * e.value;
    for (const auto& e : a22.entries()) g.g22_diagonal[e.col] += e.value * e.value;
  }
  return g;
}

void write_dense_csv(std::ostream& out, const DenseMatrix& a) {
  char buf[64];
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace bsvd
