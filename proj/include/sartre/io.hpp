#pragma once

// File formats. Variable indices are 1-based in every file.
//
//   dataset  CSV, header row of column names (x1,...,xd on write), one row
//            per observation, values printed with 17 significant digits.
//   DAG      "d=<num_vars>" then one "j,i" line per edge j -> i, sorted.
//   order    one line of comma-separated variable indices, roots first.

#include "sartre/embed.hpp"
#include "sartre/graph.hpp"
#include "sartre/prune.hpp"
#include "sartre/synthgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sartre {

using Json = nlohmann::ordered_json;

struct CsvTable {
    std::vector<std::string> names;
    Dataset data;
};

std::string format_double(double v);

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
/// Writes the table with its own header.
void write_csv_table(std::ostream& out, const CsvTable& table);
CsvTable read_csv_table(std::istream& in);
CsvTable read_csv_table(const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Rows drawn uniformly with replacement.
Dataset bootstrap_rows(const Dataset& data, std::size_t n, Seed seed);

void write_dag(std::ostream& out, const Dag& g);
void write_dag(const std::filesystem::path& path, const Dag& g);
Dag read_dag(std::istream& in);
Dag read_dag(const std::filesystem::path& path);

void write_order(std::ostream& out, const TopologicalOrder& order);
void write_order(const std::filesystem::path& path, const TopologicalOrder& order);
TopologicalOrder read_order(std::istream& in);
TopologicalOrder read_order(const std::filesystem::path& path);

Json to_json(const TreeConfig& cfg);
Json to_json(const IntervalSet& rset, const TreeConfig& cfg);
IntervalSet interval_set_from_json(const Json& j);

Json to_json(const SartreConfig& cfg);
Json to_json(const GraphMetrics& m);
Json to_json(const PiecewiseConstant& f);
/// Config echo, interval sets, per-target coefficients, and pruned edges.
Json model_to_json(const SartreModel& model);

/// Byte-identical-or-nothing file write.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

/// 64-bit FNV-1a over the raw bytes of the data matrix, as 16 hex digits.
std::string dataset_hash(const Dataset& data);

}  // namespace sartre
