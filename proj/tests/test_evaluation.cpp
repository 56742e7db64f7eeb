#include "hqcspa/bench.hpp"
#include "hqcspa/evaluation.hpp"
#include "hqcspa/export.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hqcspa;

namespace {

std::vector<std::vector<std::string>>
read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

} // namespace

TEST(RunEvaluation, SingleTrialBookkeeping)
{
  const EvaluationResult r = run_evaluation(1, LeakageParams{}, 77);
  EXPECT_EQ(r.cm_first_window.total(), 1u);
  EXPECT_EQ(r.cm_rest.total(), 15u);
  EXPECT_EQ(r.success_rate, 1.0);
}

TEST(RunEvaluation, ZeroNoiseIsPerfect)
{
  const EvaluationResult r = run_evaluation(2000, LeakageParams{}, 1);
  EXPECT_EQ(r.success_rate, 1.0);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_TRUE(r.cm_first_window.is_diagonal());
  EXPECT_TRUE(r.cm_rest.is_diagonal());
}

TEST(RunEvaluation, ReproducibleForSeed)
{
  LeakageParams p;
  p.noise_sigma = 0.02;
  const EvaluationResult a = run_evaluation(300, p, 5), b = run_evaluation(300, p, 5);
  EXPECT_EQ(a.cm_first_window, b.cm_first_window);
  EXPECT_EQ(a.cm_rest, b.cm_rest);
  EXPECT_EQ(a.successes, b.successes);
}

TEST(RunEvaluation, SuccessRateMatchesMatrices)
{
  LeakageParams p;
  p.noise_sigma = 0.03; // noisy enough to fail in several windows
  const EvaluationResult r = run_evaluation(1000, p, 6);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_DOUBLE_EQ(r.success_rate, double(r.trials - r.failures.size()) / double(r.trials));

  std::uint64_t w0_wrong = 0, rest_wrong = 0;
  for (const auto& f : r.failures)
    for (std::size_t k : f.windows)
      (k == 0 ? w0_wrong : rest_wrong)++;
  std::uint64_t w0_off = 0, rest_off = 0;
  for (std::size_t row = 0; row < 16; ++row) {
    w0_off += r.cm_first_window.off_diagonal(row);
    rest_off += r.cm_rest.off_diagonal(row);
  }
  EXPECT_EQ(w0_off, w0_wrong);
  EXPECT_EQ(rest_off, rest_wrong);
}

TEST(RunEvaluation, RejectsZeroTrials)
{
  EXPECT_THROW(run_evaluation(0, LeakageParams{}, 1), std::invalid_argument);
}

TEST(ConfusionMatrix, RowsNormalize)
{
  ConfusionMatrix cm;
  cm.add(3, 3);
  cm.add(3, 3);
  cm.add(3, 4);
  cm.add(0, 0);
  const auto m = cm.normalized();
  EXPECT_DOUBLE_EQ(m[3][3] + m[3][4], 1.0);
  EXPECT_DOUBLE_EQ(m[0][0], 1.0);
  double empty = 0;
  for (double v : m[7])
    empty += v;
  EXPECT_EQ(empty, 0.0);
}

TEST(ExportMatrix, DiagonalAndPrecision)
{
  ConfusionMatrix cm;
  for (Nibble v = 0; v < 16; ++v)
    cm.add(v, v);
  cm.add(5, 6);
  cm.add(5, 6); // row 5: 1/3 on diagonal, 2/3 off
  const auto path = std::filesystem::temp_directory_path() / "hqcspa_cm.csv";
  export_matrix_csv(cm, path);
  const auto rows = read_csv(path);
  ASSERT_EQ(rows.size(), 16u);
  const auto m = cm.normalized();
  for (std::size_t r = 0; r < 16; ++r) {
    ASSERT_EQ(rows[r].size(), 16u);
    for (std::size_t c = 0; c < 16; ++c)
      EXPECT_NEAR(std::stod(rows[r][c]), m[r][c], 5e-7);
  }
  EXPECT_EQ(rows[0][0], "1.000000");
  EXPECT_EQ(rows[5][5], "0.333333");
  std::filesystem::remove(path);
}

TEST(ExportTrace, TallestFirstWindowPeakAtNibble)
{
  const LeakageParams p;
  const Trace t = simulate_trace(0xA, 0x0123456789ABCDEFULL, p, 0);
  const auto path = std::filesystem::temp_directory_path() / "hqcspa_trace.csv";
  export_trace_csv(t, path);
  const auto rows = read_csv(path);
  ASSERT_EQ(rows.size(), t.samples.size() + 1);
  EXPECT_EQ(rows[0], (std::vector<std::string>{ "index", "value", "peak" }));

  std::vector<std::pair<std::size_t, double>> w0;
  std::size_t total_peaks = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][2] != "1")
      continue;
    ++total_peaks;
    const std::size_t idx = std::stoul(rows[i][0]);
    if (idx < p.scan_offset + 16 * p.samples_per_iter)
      w0.emplace_back(idx, std::stod(rows[i][1]));
  }
  EXPECT_EQ(total_peaks, 256u);
  ASSERT_EQ(w0.size(), 16u);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < 16; ++i)
    if (w0[i].second > w0[arg].second)
      arg = i;
  EXPECT_EQ(arg, 10u);
  std::filesystem::remove(path);
}

TEST(Bench, BasicsAndChecksum)
{
  const BenchResult one = run_bench(Kernel::window, 1, 3);
  EXPECT_GT(one.elapsed, 0.0);
  EXPECT_EQ(one.repetitions.size(), 5u);

  std::uint64_t ref = 0;
  for (Kernel k : { Kernel::window, Kernel::serial, Kernel::direct, Kernel::masked }) {
    const BenchResult r = run_bench(k, 20000, 11);
    EXPECT_DOUBLE_EQ(r.per_call, r.elapsed * 1e9 / 20000.0);
    if (k == Kernel::window)
      ref = r.checksum;
    EXPECT_EQ(r.checksum, ref) << kernel_name(k);
  }
  EXPECT_THROW(run_bench(Kernel::direct, 0, 1), std::invalid_argument);
}
