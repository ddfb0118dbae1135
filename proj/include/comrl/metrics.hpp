#pragma once

#include <span>
#include <string>
#include <vector>

#include "comrl/common.hpp"

namespace comrl {

// One evaluation point of one seeded run. Returns aggregate over the test
// tasks (OOD additionally over every behavior checkpoint per task). Wall
// clock lives in its own file so the metrics CSV stays byte-reproducible.
struct MetricsRow {
  uint64_t seed = 0;
  int step = 0;
  double repr_loss = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double iid_mean = 0.0;
  double iid_std = 0.0;
  double ood_mean = 0.0;
  double ood_std = 0.0;
  double wall_clock_s = 0.0;
};

// RFC-4180 rows, shortest round-trip doubles, '\n' line ends, seeds in run
// order with steps ascending inside each seed.
std::string metrics_csv(std::span<const MetricsRow> rows);

// seed,wall_clock_s with one row per (seed, step); the only non-reproducible
// output of a run.
std::string timings_csv(std::span<const MetricsRow> rows);

// Standalone SVG line chart of IID and OOD return against training step,
// each point the mean over seeds.
std::string learning_curve_svg(std::span<const MetricsRow> rows,
                               const std::string& title);

// Mean over seeds of the last eval step's return column.
double final_iid_mean(std::span<const MetricsRow> rows);
double final_ood_mean(std::span<const MetricsRow> rows);

// Whole-file IO; writing creates parent directories.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace comrl
