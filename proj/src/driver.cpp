#include "bsvd/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "bsvd/baseline_svd.hpp"
#include "bsvd/block_reflector.hpp"
#include "bsvd/eigen.hpp"
#include "bsvd/errors.hpp"

namespace bsvd {
namespace {

// Rows of `a` are in permuted order; row i goes back to map[i].
DenseMatrix unpermute_rows(const DenseMatrix& a, const Permutation& p) {
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto src = a.row(i);
    std::copy(src.begin(), src.end(), out.row(p[i]).begin());
  }
  return out;
}

void to_input_frame(DecomposeResult& r, DenseMatrix u, DenseMatrix v) {
  u = unpermute_rows(u, r.provenance.row_p);
  v = unpermute_rows(v, r.provenance.col_p);
  if (r.provenance.transposed) std::swap(u, v);
  r.u_slice = std::move(u);
  r.v_slice = std::move(v);
}

std::vector<double> full_spectrum(const SparseTriplets& sorted, const BlockPartition& p) {
  BlockMatrix2x2 b{to_dense(extract_block(sorted, p, BlockId::k11)), to_dense(extract_block(sorted, p, BlockId::k12)),
                   to_dense(extract_block(sorted, p, BlockId::k21)), to_dense(extract_block(sorted, p, BlockId::k22))};
  const FullBlockSvd f = full_block_svd(std::move(b));
  std::vector<double> out = svd_jacobi(f.blocks.a11).d.values();
  const auto lower = svd_jacobi(f.blocks.a22).d.values();
  out.insert(out.end(), lower.begin(), lower.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::uint64_t next(std::mt19937_64& g) { return g(); }

// Uniform in [0, 1) from the top 53 bits.
double unit(std::mt19937_64& g) { return static_cast<double>(next(g) >> 11) * 0x1.0p-53; }

}  // namespace

void RunConfig::validate() const {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("fraction must lie in (0, 1)");
  if (!(ratio_tol > 0.0 && ratio_tol < 1.0)) throw UsageError("ratio-tol must lie in (0, 1)");
  if (max_iters < 1) throw UsageError("max-iters must be at least 1");
  if (!(tol_rank > 0.0 && tol_rank < 1.0)) throw UsageError("tol-rank must lie in (0, 1)");
}

std::size_t block_budget(const SparseTriplets& sorted, const BlockPartition& p) {
  const std::size_t r2 = sorted.rows() - p.row_cut;
  const std::size_t c2 = sorted.cols() - p.col_cut;
  const std::size_t largest = std::max({p.row_cut * p.col_cut, p.row_cut * c2, r2 * p.col_cut, r2 * c2});
  return largest * sizeof(double);
}

std::size_t working_set_floor(const SparseTriplets& sorted, const BlockPartition& p) {
  const std::size_t n = sorted.cols();
  return (8 * n * n + 3 * sorted.rows() * p.col_cut) * sizeof(double);
}

std::size_t auto_budget(const SparseTriplets& sorted, const BlockPartition& p) {
  return std::max(block_budget(sorted, p), working_set_floor(sorted, p));
}

DenseMatrix assemble_economy(const SparseTriplets& sorted, const BlockPartition& p, const DenseMatrix& v,
                             const DiagonalMatrix& d) {
  if (v.rows() != sorted.cols() || v.cols() != d.size()) throw DimensionError("assemble_economy: shape mismatch");
  const DenseMatrix v_top = v.rows_range(0, p.col_cut);
  const DenseMatrix v_bot = v.rows_range(p.col_cut, sorted.cols() - p.col_cut);
  DenseMatrix u_top = multiply(extract_block(sorted, p, BlockId::k11), v_top);
  u_top += multiply(extract_block(sorted, p, BlockId::k12), v_bot);
  DenseMatrix u_bot = multiply(extract_block(sorted, p, BlockId::k21), v_top);
  u_bot += multiply(extract_block(sorted, p, BlockId::k22), v_bot);
  std::vector<double> inv(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw RankError("assemble_economy: non-positive singular value");
    inv[i] = 1.0 / d[i];
  }
  for (DenseMatrix* part : {&u_top, &u_bot})
    for (std::size_t i = 0; i < part->rows(); ++i) {
      auto r = part->row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] *= inv[j];
    }
  return vstack(u_top, u_bot);
}

DecomposeResult run_decompose(const SparseTriplets& a, const RunConfig& cfg) {
  cfg.validate();
  const PortraitResult portrait = ensure_portrait(a);
  const SortPermutations perms = sort_by_norms(portrait.matrix);
  const SparseTriplets sorted = permute(portrait.matrix, perms.row_p, perms.col_p);

  BlockPartition part;
  try {
    part = choose_cut(sorted, cfg.fraction);
  } catch (const DegenerateCutError& e) {
    DecomposeResult r = run_baseline(a, cfg);
    r.provenance.notes.push_back(std::string("degenerate cut, baseline used: ") + e.what());
    return r;
  }

  DecomposeResult r;
  r.provenance = {perms.row_p, perms.col_p, portrait.transposed, part, "block", {}};
  r.partition_report = partition_report(sorted, part);
  r.budget_bytes = cfg.budget_bytes ? cfg.budget_bytes : auto_budget(sorted, part);

  DenseMatrix u, v;
  {
    memory::reset_peak();
    const memory::BudgetScope scope(r.budget_bytes);
    TraceIterState state = make_state(gram_blockwise(sorted, part, r.budget_bytes));
    state = initial_annihilation(std::move(state), cfg.tol_rank);

    IterateResult it;
    try {
      it = iterate(std::move(state), {cfg.ratio_tol, cfg.max_iters, cfg.tol_rank});
    } catch (IterationLimitError& e) {
      it = e.take_partial();
      r.converged = false;
      r.provenance.notes.push_back(e.what());
    }
    r.iteration_log = it.log;
    r.initial_ratio = it.initial_ratio;
    r.final_ratio = it.final_ratio;
    DenseMatrix v1 = std::move(it.state.v1);
    it.state = {};

    // Block 11 of AᵗA from the accumulated slice, then its eigenpairs.
    DenseMatrix g11;
    {
      const DenseMatrix y = multiply(sorted, v1);
      g11 = matmul_tn(y, y);
    }
    symmetrize(g11);
    const SymmetricEigen eig = jacobi_eigh(g11);
    const double top = eig.values.empty() ? 0.0 : eig.values[0];
    std::vector<double> d;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
      if (eig.values[i] > cfg.tol_rank * top && eig.values[i] > 0.0) {
        d.push_back(std::sqrt(eig.values[i]));
        keep.push_back(i);
      }
    }
    if (keep.size() < eig.values.size()) {
      r.provenance.notes.push_back(std::to_string(eig.values.size() - keep.size()) +
                                   " values below the rank cutoff dropped");
    }
    DenseMatrix w(eig.vectors.rows(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k)
      for (std::size_t i = 0; i < w.rows(); ++i) w(i, k) = eig.vectors(i, keep[k]);
    v = matmul(v1, w);
    r.singular_values = DiagonalMatrix(std::move(d));
    u = assemble_economy(sorted, part, v, r.singular_values);
    r.memory = memory::stats();
  }
  to_input_frame(r, std::move(u), std::move(v));
  if (cfg.full) r.full_spectrum = full_spectrum(sorted, part);
  return r;
}

DecomposeResult run_decompose(const RunConfig& cfg) {
  return run_decompose(read_triplets_file(cfg.input, cfg.one_based), cfg);
}

DecomposeResult run_baseline(const SparseTriplets& a, const RunConfig& cfg) {
  const PortraitResult portrait = ensure_portrait(a);
  DecomposeResult r;
  r.provenance.row_p = Permutation::identity(portrait.matrix.rows());
  r.provenance.col_p = Permutation::identity(portrait.matrix.cols());
  r.provenance.transposed = portrait.transposed;
  r.provenance.method = "baseline";
  r.budget_bytes = cfg.budget_bytes ? cfg.budget_bytes : memory::kUnlimited;
  EconomySVD s;
  {
    memory::reset_peak();
    const memory::BudgetScope scope(r.budget_bytes);
    s = portrait.matrix.cols() == 0 ? EconomySVD{DenseMatrix(portrait.matrix.rows(), 0), {}, DenseMatrix(0, 0)}
                                    : economy_svd_gram(portrait.matrix, cfg.tol_rank);
    r.memory = memory::stats();
  }
  r.singular_values = std::move(s.d);
  to_input_frame(r, std::move(s.u_slice), std::move(s.v_slice));
  return r;
}

DecomposeResult run_baseline(const RunConfig& cfg) {
  return run_baseline(read_triplets_file(cfg.input, cfg.one_based), cfg);
}

double ComparisonReport::max_rel(std::size_t skip_tail) const {
  double m = 0.0;
  for (std::size_t i = 0; i + skip_tail < k; ++i) m = std::max(m, rel_diff[i]);
  return m;
}

double ComparisonReport::max_rel_tail(std::size_t tail) const {
  double m = 0.0;
  for (std::size_t i = k > tail ? k - tail : 0; i < k; ++i) m = std::max(m, rel_diff[i]);
  return m;
}

ComparisonReport compare(const DecomposeResult& a, const DecomposeResult& b, std::size_t k) {
  const std::size_t avail = std::min(a.singular_values.size(), b.singular_values.size());
  if (k == 0) k = avail;
  if (k > avail) throw UsageError("compare: only " + std::to_string(avail) + " values available");
  ComparisonReport rep;
  rep.k = k;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = a.singular_values[i];
    const double y = b.singular_values[i];
    const double diff = std::abs(x - y);
    const double scale = std::max(std::abs(x), std::abs(y));
    rep.abs_diff.push_back(diff);
    rep.rel_diff.push_back(scale > 0.0 ? diff / scale : 0.0);
  }
  return rep;
}

SparseTriplets gen_synthetic(std::size_t rows, std::size_t cols, double density, double zipf, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw UsageError("gen_synthetic: density must lie in (0, 1]");
  std::vector<double> weight(cols), q(cols, 1.0);
  for (std::size_t j = 0; j < cols; ++j) weight[j] = std::pow(static_cast<double>(j + 1), -zipf);
  // Hit probabilities ∝ weight with mean `density`; any that would pass 1 are
  // pinned there and the rest rescaled.
  std::vector<bool> capped(cols, false);
  for (bool changed = true; changed;) {
    changed = false;
    double free_mass = 0.0, pinned = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (capped[j]) pinned += 1.0;
      else free_mass += weight[j];
    }
    const double scale = free_mass > 0.0 ? (density * static_cast<double>(cols) - pinned) / free_mass : 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (capped[j]) continue;
      q[j] = weight[j] * scale;
      if (q[j] >= 1.0) {
        q[j] = 1.0;
        capped[j] = true;
        changed = true;
      }
    }
  }

  std::mt19937_64 gen(seed);
  std::vector<std::size_t> shuffle(cols);
  std::iota(shuffle.begin(), shuffle.end(), 0);
  for (std::size_t i = cols; i > 1; --i) {
    const auto j = static_cast<std::size_t>((static_cast<unsigned __int128>(next(gen)) * i) >> 64);
    std::swap(shuffle[i - 1], shuffle[j]);
  }
  std::vector<Entry> entries;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (unit(gen) >= q[c]) continue;
      // 1 + Geometric(1/2) by inversion.
      const double u = unit(gen);
      const double extra = std::floor(std::log1p(-u) / std::log(0.5));
      entries.push_back({r, shuffle[c], 1.0 + extra});
    }
  }
  return SparseTriplets(rows, cols, std::move(entries));
}

void write_iterations_tsv(std::ostream& out, const std::vector<IterationRecord>& log) {
  out << "ITER\tTRACE11\tTRACE22\tNONDIAG\tSECONDS\n";
  char buf[256];
  for (const auto& rec : log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.6f\n", rec.iteration, rec.trace11, rec.trace22,
                  rec.nondiag, rec.seconds);
    out << buf;
  }
}

void write_outputs(const DecomposeResult& r, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(std::string("cannot write ") + (dir / name).string());
    return f;
  };
  {
    auto f = open("singular_values.txt");
    char buf[64];
    for (double d : r.singular_values.values()) {
      std::snprintf(buf, sizeof buf, "%.17g\n", d);
      f << buf;
    }
  }
  {
    auto f = open("u_slice.csv");
    write_dense_csv(f, r.u_slice);
  }
  {
    auto f = open("v_slice.csv");
    write_dense_csv(f, r.v_slice);
  }
  {
    auto f = open("iterations.tsv");
    write_iterations_tsv(f, r.iteration_log);
  }
  if (r.partition_report) {
    auto f = open("partition.tsv");
    write_partition_tsv(f, *r.partition_report);
  }
  if (!r.full_spectrum.empty()) {
    auto f = open("full_spectrum.txt");
    char buf[64];
    for (double d : r.full_spectrum) {
      std::snprintf(buf, sizeof buf, "%.17g\n", d);
      f << buf;
    }
  }
  auto f = open("provenance.txt");
  const auto join = [](const Permutation& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + std::to_string(p[i]);
    return s;
  };
  f << "method=" << r.provenance.method << '\n'
    << "transposed=" << (r.provenance.transposed ? "true" : "false") << '\n'
    << "row_cut=" << r.provenance.partition.row_cut << '\n'
    << "col_cut=" << r.provenance.partition.col_cut << '\n'
    << "row_permutation=" << join(r.provenance.row_p) << '\n'
    << "col_permutation=" << join(r.provenance.col_p) << '\n'
    << "converged=" << (r.converged ? "true" : "false") << '\n'
    << "iterations=" << (r.iteration_log.empty() ? 0 : r.iteration_log.back().iteration) << '\n'
    << "rank=" << r.singular_values.size() << '\n'
    << "budget_bytes=" << r.budget_bytes << '\n'
    << "peak_bytes=" << r.memory.peak_bytes << '\n'
    << "largest_allocation=" << r.memory.largest_allocation << '\n'
    << "input=" << cfg.input << '\n'
    << "one_based=" << (cfg.one_based ? "true" : "false") << '\n'
    << "fraction=" << cfg.fraction << '\n'
    << "ratio_tol=" << cfg.ratio_tol << '\n'
    << "max_iters=" << cfg.max_iters << '\n'
    << "tol_rank=" << cfg.tol_rank << '\n';
  for (const auto& n : r.provenance.notes) f << "note=" << n << '\n';
}

}  // namespace bsvd
