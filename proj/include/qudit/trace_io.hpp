#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "qudit/decay_fit.hpp"

namespace qudit {

/// Reads a trace CSV: header `t_us,amplitude`, optional `# kind=` and
/// `# field_mT=` comment lines (anywhere before the data ends), other `#`
/// lines ignored. Throws DataError with the line number for bad rows and
/// for times that are not strictly ascending.
DecayTrace read_trace_csv(std::istream& in, const std::string& source);

/// As read_trace_csv; throws MissingDataError if the file cannot be opened.
DecayTrace read_trace_file(const std::filesystem::path& path);

struct TraceFailure {
  std::string source;
  std::string message;
};

struct TraceBatch {
  std::vector<DecayTrace> traces;  // ascending field, then file name
  std::vector<TraceFailure> failures;
};

/// Every `*.csv` in `dir` (not recursive). Files that fail to parse are
/// reported in `failures` and the rest are still returned. Throws
/// MissingDataError if `dir` is not a directory or holds no CSV files.
TraceBatch ingest_trace_dir(const std::filesystem::path& dir);

}  // namespace qudit
