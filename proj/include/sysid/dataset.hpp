#ifndef SYSID_DATASET_HPP
#define SYSID_DATASET_HPP

#include "sysid/lti.hpp"

#include <string>
#include <vector>

namespace sysid {

/// Which columns of a numeric text file hold inputs and outputs, plus an
/// optional count of header rows to skip.
struct ColumnSpec {
    std::vector<Index> input_columns;
    std::vector<Index> output_columns;
    Index skip_rows = 0;
};

struct DatasetSplit {
    RolloutData train;
    RolloutData val;
};

/// Whitespace- or comma-delimited numeric table. Parse failures report the
/// offending line number.
Eigen::MatrixXd load_numeric_table(const std::string& path, Index skip_rows = 0);

/// Round-trip-exact writer for the same format (17 significant digits).
void write_numeric_table(const std::string& path, const Eigen::MatrixXd& table);

/// Builds sliding-window regression data from one recorded trajectory:
/// training rows are output times 2n-1 .. 2n-2+T, validation rows follow
/// contiguously. Requires T + T_val + 2n - 2 table rows.
DatasetSplit load_dataset(const std::string& path, const ColumnSpec& spec, Index n, Index T,
                          Index T_val);

/// Same construction from an in-memory table (time on rows).
DatasetSplit split_from_table(const Eigen::MatrixXd& table, const ColumnSpec& spec, Index n,
                              Index T, Index T_val);

} // namespace sysid

#endif
