#pragma once

// Training-curve and attention-weight charts from a run directory. Every SVG
// is written next to a CSV holding exactly the plotted series.

#include <filesystem>
#include <string>
#include <vector>

namespace macaac {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws SchemaError naming the column when absent.
  std::size_t column(const std::string& name) const;
};

// Numeric CSV with a header line. Throws SchemaError on ragged or
// non-numeric rows.
Table read_csv(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string title, x_label, y_label;
  bool y_from_zero = false;  // clamp the axis minimum to 0
};

std::string render_svg(const ChartSpec& spec, const std::vector<Series>& series);

// Reads metrics.csv (required), lambda.csv and attention.csv (optional) and
// writes charts into out_dir (default run_dir/plots). Returns the files
// written. Validates every input before writing anything.
std::vector<std::filesystem::path> plot_run(const std::filesystem::path& run_dir,
                                            std::filesystem::path out_dir = {});

}  // namespace macaac
