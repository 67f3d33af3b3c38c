#include "qudit/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "qudit/error.hpp"

namespace qudit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

DecayTrace read_trace_csv(std::istream& in, const std::string& source) {
  DecayTrace trace;
  trace.source = source;
  bool header_seen = false;
  int line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string_view body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(trim(body.substr(0, eq)));
      const std::string value(trim(body.substr(eq + 1)));
      if (key == "kind") {
        try {
          trace.kind = parse_echo_kind(value);
        } catch (const ValidationError& e) {
          throw DataError(source, line_no, e.what());
        }
      } else if (key == "field_mT") {
        if (!parse_double(value, trace.field_mt) || trace.field_mt < 0.0) {
          throw DataError(source, line_no, "field_mT must be a non-negative number");
        }
      }
      continue;
    }
    if (!header_seen) {
      const auto comma = text.find(',');
      if (comma == std::string_view::npos || trim(text.substr(0, comma)) != "t_us" ||
          trim(text.substr(comma + 1)) != "amplitude") {
        throw DataError(source, line_no, "expected header 't_us,amplitude'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = text.find(',');
    double t = 0.0;
    double y = 0.0;
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos ||
        !parse_double(text.substr(0, comma), t) || !parse_double(text.substr(comma + 1), y)) {
      throw DataError(source, line_no, "expected two finite numbers");
    }
    const std::size_t row = trace.times_us.size() + 1;
    if (!trace.times_us.empty() && !(t > trace.times_us.back())) {
      throw DataError(source, line_no, "time not strictly ascending at data row " + std::to_string(row));
    }
    trace.times_us.push_back(t);
    trace.amplitude.push_back(y);
  }
  if (!header_seen) throw DataError(source, 0, "no header line");
  try {
    trace.validate();
  } catch (const ValidationError& e) {
    throw DataError(source, 0, e.what());
  }
  return trace;
}

DecayTrace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingDataError(path.string() + ": cannot open trace file");
  return read_trace_csv(in, path.string());
}

TraceBatch ingest_trace_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw MissingDataError(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (files.empty()) throw MissingDataError(dir.string() + ": no *.csv trace files");
  std::sort(files.begin(), files.end());

  TraceBatch batch;
  for (const auto& f : files) {
    try {
      batch.traces.push_back(read_trace_file(f));
    } catch (const Error& e) {
      batch.failures.push_back({f.string(), e.what()});
    }
  }
  std::stable_sort(batch.traces.begin(), batch.traces.end(),
                   [](const DecayTrace& a, const DecayTrace& b) { return a.field_mt < b.field_mt; });
  return batch;
}

}  // namespace qudit
