#include "sysid/dataset.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sysid {

Eigen::MatrixXd load_numeric_table(const std::string& path, Index skip_rows) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= skip_rows) continue;
        for (char& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        while (ss >> tok) {
            try {
                std::size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": unparseable value '" + tok + "' on line " +
                                         std::to_string(line_no));
            }
        }
        if (row.empty()) continue; // blank line
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ": ragged row on line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no numeric rows");

    Eigen::MatrixXd table(Index(rows.size()), Index(rows.front().size()));
    for (Index i = 0; i < table.rows(); ++i)
        for (Index j = 0; j < table.cols(); ++j) table(i, j) = rows[i][j];
    return table;
}

void write_numeric_table(const std::string& path, const Eigen::MatrixXd& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[64];
    for (Index i = 0; i < table.rows(); ++i) {
        for (Index j = 0; j < table.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", table(i, j));
            out << buf << (j + 1 < table.cols() ? " " : "");
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

DatasetSplit split_from_table(const Eigen::MatrixXd& table, const ColumnSpec& spec, Index n,
                              Index T, Index T_val) {
    if (spec.input_columns.empty() || spec.output_columns.empty())
        throw std::invalid_argument("column spec needs at least one input and one output column");
    for (Index c : spec.input_columns)
        if (c < 0 || c >= table.cols()) throw std::invalid_argument("input column out of range");
    for (Index c : spec.output_columns)
        if (c < 0 || c >= table.cols()) throw std::invalid_argument("output column out of range");
    if (n < 1 || T < 1 || T_val < 0) throw std::invalid_argument("bad split sizes");

    const Index p = Index(spec.input_columns.size());
    const Index m = Index(spec.output_columns.size());
    const Index needed = 2 * n - 2 + T + T_val;
    if (table.rows() < needed)
        throw std::invalid_argument("dataset too short: need " + std::to_string(needed) +
                                    " rows for n=" + std::to_string(n) + ", got " +
                                    std::to_string(table.rows()));

    auto make = [&](Index t0, Index count) {
        RolloutData d;
        d.mode = RolloutData::Mode::single_rollout;
        d.shaped = false;
        d.sigma_z = 0.0;
        d.seed = 0;
        d.n = n;
        d.p = p;
        d.m = m;
        d.regressors.resize(count, (2 * n - 1) * p);
        d.outputs.resize(count, m);
        for (Index t = 0; t < count; ++t) {
            const Index end = t0 + t + 2 * n - 2; // 0-based row of the output sample
            for (Index j = 0; j < 2 * n - 1; ++j)
                for (Index c = 0; c < p; ++c)
                    d.regressors(t, j * p + c) = table(end - j, spec.input_columns[c]);
            for (Index c = 0; c < m; ++c) d.outputs(t, c) = table(end, spec.output_columns[c]);
        }
        return d;
    };

    DatasetSplit split;
    split.train = make(0, T);
    split.val = make(T, T_val);
    return split;
}

DatasetSplit load_dataset(const std::string& path, const ColumnSpec& spec, Index n, Index T,
                          Index T_val) {
    return split_from_table(load_numeric_table(path, spec.skip_rows), spec, n, T, T_val);
}

} // namespace sysid
