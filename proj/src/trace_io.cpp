#include "twinbeam/trace_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>
#include <system_error>

#include "twinbeam/errors.hpp"

namespace twinbeam {
namespace {

constexpr std::string_view kNormalization = "shot_sigma0=1";
constexpr std::string_view kColumns = "signal,idler";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::string format_sample(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                       std::chars_format::scientific, 16);
  return std::string(buf.data(), ptr);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

void save_trace(const Trace& trace, const std::filesystem::path& path,
                bool overwrite) {
  trace.validate();
  std::error_code ec;
  if (!overwrite && std::filesystem::exists(path, ec)) {
    throw IoError(path.string() + ": file exists (pass overwrite to replace)");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");

  out << "# sample_rate_hz = " << format_number(trace.meta.sample_rate_hz) << '\n'
      << "# demod_frequency_hz = " << format_number(trace.meta.demod_frequency_hz)
      << '\n'
      << "# seed = " << trace.meta.seed << '\n'
      << "# length = " << trace.size() << '\n'
      << "# normalization = " << kNormalization << '\n'
      << kColumns << '\n';
  std::string line;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    line = format_sample(trace.signal[k]);
    line += ',';
    line += format_sample(trace.idler[k]);
    line += '\n';
    out << line;
  }
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open trace file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Trace trace;
  std::optional<std::size_t> declared_length;
  bool in_header = true;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (in_header) {
      if (!line.empty() && line.front() == '#') {
        const std::string_view body = line.substr(1);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
          throw TraceParseError(line_no, "malformed header, expected '# key = value'");
        }
        const std::string_view key = trim(body.substr(0, eq));
        const std::string_view value = trim(body.substr(eq + 1));
        if (key == "sample_rate_hz" || key == "demod_frequency_hz") {
          const auto v = parse_double(value);
          if (!v || !std::isfinite(*v)) {
            throw TraceParseError(line_no, "bad numeric value for " + std::string(key));
          }
          (key == "sample_rate_hz" ? trace.meta.sample_rate_hz
                                   : trace.meta.demod_frequency_hz) = *v;
        } else if (key == "seed" || key == "length") {
          const auto v = parse_uint(value);
          if (!v) throw TraceParseError(line_no, "bad integer value for " + std::string(key));
          if (key == "seed") {
            trace.meta.seed = *v;
          } else {
            declared_length = static_cast<std::size_t>(*v);
          }
        } else if (key == "normalization") {
          if (value != kNormalization) {
            throw TraceParseError(line_no, "unsupported normalization '" +
                                               std::string(value) + "'");
          }
        } else if (key.empty()) {
          throw TraceParseError(line_no, "malformed header, empty key");
        }
        // Other keys are carried by external digitizer exports and ignored.
        continue;
      }
      if (trim(line) != kColumns) {
        throw TraceParseError(line_no, "expected column header 'signal,idler'");
      }
      in_header = false;
      if (declared_length) {
        trace.signal.reserve(*declared_length);
        trace.idler.reserve(*declared_length);
      }
      continue;
    }

    if (trim(line).empty()) {
      if (pos >= text.size()) break;
      throw TraceParseError(line_no, "empty record");
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw TraceParseError(line_no, "record has one column, expected signal,idler");
    }
    const std::string_view rest = line.substr(comma + 1);
    if (rest.find(',') != std::string_view::npos) {
      throw TraceParseError(line_no, "record has more than two columns");
    }
    const auto s = parse_double(line.substr(0, comma));
    const auto i = parse_double(rest);
    if (!s || !i) throw TraceParseError(line_no, "unparsable sample");
    if (!std::isfinite(*s) || !std::isfinite(*i)) {
      throw TraceParseError(line_no, "non-finite sample");
    }
    trace.signal.push_back(*s);
    trace.idler.push_back(*i);
  }
  if (in_header) {
    throw TraceParseError(line_no, "missing column header 'signal,idler'");
  }
  if (declared_length && *declared_length != trace.size()) {
    throw TraceParseError(line_no, "header declares length " +
                                       std::to_string(*declared_length) + " but " +
                                       std::to_string(trace.size()) +
                                       " records were read");
  }
  return trace;
}

}  // namespace twinbeam
