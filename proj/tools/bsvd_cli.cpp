#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "bsvd/driver.hpp"
#include "bsvd/errors.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kConvergence = 2;
constexpr int kIo = 3;
constexpr int kBudget = 4;

void add_input(CLI::App* cmd, bsvd::RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "triplet CSV file (row,col,value)")->required();
  cmd->add_flag("--one-based", cfg.one_based, "indices in the file start at 1");
}

void add_block_options(CLI::App* cmd, bsvd::RunConfig& cfg) {
  cmd->add_option("--fraction", cfg.fraction, "share of the square norm in the first column block")
      ->capture_default_str();
  cmd->add_option("--ratio-tol", cfg.ratio_tol, "stop when nondiag/trace11 falls by this factor")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iters)->capture_default_str();
  cmd->add_option("--tol-rank", cfg.tol_rank)->capture_default_str();
}

void print_comparison(const bsvd::DecomposeResult& block, const bsvd::DecomposeResult& base,
                      const bsvd::ComparisonReport& rep) {
  std::printf("INDEX\tBLOCK\tBASELINE\tABS DIFF\tREL DIFF\n");
  for (std::size_t i = 0; i < rep.k; ++i) {
    std::printf("%zu\t%.17g\t%.17g\t%.3e\t%.3e\n", i, block.singular_values[i], base.singular_values[i],
                rep.abs_diff[i], rep.rel_diff[i]);
  }
  const std::size_t tail = std::min<std::size_t>(4, rep.k);
  std::printf("# max rel diff (all but lowest %zu): %.3e\n", tail, rep.max_rel(tail));
  std::printf("# max rel diff (lowest %zu): %.3e\n", tail, rep.max_rel_tail(tail));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blockwise SVD of large sparse matrices"};
  app.require_subcommand(1);

  bsvd::RunConfig cfg;
  std::size_t rank = 0;
  std::size_t rows = 2000, cols = 400;
  double density = 0.005, zipf = 1.1;
  std::string output;

  auto* decompose = app.add_subcommand("decompose", "blockwise dominant-subspace SVD");
  add_input(decompose, cfg);
  add_block_options(decompose, cfg);
  decompose->add_option("--budget-bytes", cfg.budget_bytes, "dense memory budget; 0 = automatic")
      ->capture_default_str();
  decompose->add_option("--out-dir", cfg.out_dir)->required();
  decompose->add_flag("--full", cfg.full, "also run the full blockwise decomposition (small inputs)");

  auto* baseline = app.add_subcommand("baseline", "dense Gram-route SVD of the whole matrix");
  add_input(baseline, cfg);
  baseline->add_option("--budget-bytes", cfg.budget_bytes, "dense memory budget; 0 = none")->capture_default_str();
  baseline->add_option("--tol-rank", cfg.tol_rank)->capture_default_str();
  baseline->add_option("--out-dir", cfg.out_dir)->required();

  auto* stats = app.add_subcommand("stats", "partition table after sorting");
  add_input(stats, cfg);
  stats->add_option("--fraction", cfg.fraction)->capture_default_str();
  stats->add_option("--out-dir", cfg.out_dir);

  auto* cmp = app.add_subcommand("compare", "blockwise values against the baseline");
  add_input(cmp, cfg);
  add_block_options(cmp, cfg);
  cmp->add_option("--budget-bytes", cfg.budget_bytes)->capture_default_str();
  cmp->add_option("--rank", rank, "number of leading values to compare; 0 = all available")
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen-synthetic", "Zipfian term-document-like matrix");
  gen->add_option("--rows", rows)->capture_default_str();
  gen->add_option("--cols", cols)->capture_default_str();
  gen->add_option("--density", density)->capture_default_str();
  gen->add_option("--zipf", zipf)->capture_default_str();
  gen->add_option("--seed", cfg.seed)->capture_default_str();
  gen->add_option("--output", output, "file to write; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (decompose->parsed()) {
      const auto r = bsvd::run_decompose(cfg);
      bsvd::write_outputs(r, cfg, cfg.out_dir);
      for (const auto& n : r.provenance.notes) std::cerr << "note: " << n << '\n';
      std::printf("rank %zu, iterations %zu, method %s\n", r.singular_values.size(),
                  r.iteration_log.empty() ? std::size_t{0} : r.iteration_log.back().iteration,
                  r.provenance.method.c_str());
      return r.converged ? kOk : kConvergence;
    }
    if (baseline->parsed()) {
      const auto r = bsvd::run_baseline(cfg);
      bsvd::write_outputs(r, cfg, cfg.out_dir);
      std::printf("rank %zu\n", r.singular_values.size());
      return kOk;
    }
    if (stats->parsed()) {
      cfg.validate();
      const auto a = bsvd::read_triplets_file(cfg.input, cfg.one_based);
      const auto portrait = bsvd::ensure_portrait(a);
      const auto perms = bsvd::sort_by_norms(portrait.matrix);
      const auto sorted = bsvd::permute(portrait.matrix, perms.row_p, perms.col_p);
      const auto part = bsvd::choose_cut(sorted, cfg.fraction);
      const auto report = bsvd::partition_report(sorted, part);
      bsvd::write_partition_tsv(std::cout, report);
      if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream f(std::filesystem::path(cfg.out_dir) / "partition.tsv");
        bsvd::write_partition_tsv(f, report);
      }
      return kOk;
    }
    if (cmp->parsed()) {
      const auto a = bsvd::read_triplets_file(cfg.input, cfg.one_based);
      const auto block = bsvd::run_decompose(a, cfg);
      bsvd::RunConfig base_cfg = cfg;
      base_cfg.budget_bytes = 0;
      const auto base = bsvd::run_baseline(a, base_cfg);
      print_comparison(block, base, bsvd::compare(block, base, rank));
      return block.converged ? kOk : kConvergence;
    }
    if (gen->parsed()) {
      const auto m = bsvd::gen_synthetic(rows, cols, density, zipf, cfg.seed);
      if (output.empty()) {
        bsvd::write_triplets(std::cout, m);
      } else {
        std::ofstream f(output);
        if (!f) throw bsvd::Error("cannot write " + output);
        bsvd::write_triplets(f, m);
      }
      return kOk;
    }
  } catch (const bsvd::MemoryBudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const bsvd::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConvergence;
  } catch (const bsvd::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const bsvd::DegenerateCutError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    // Parse, dimension and file errors.
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
