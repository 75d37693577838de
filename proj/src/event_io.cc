#include "dlcz/event_io.h"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace dlcz {
namespace {

[[noreturn]] void fail(const std::string& source, std::size_t row, const std::string& what) {
  std::ostringstream msg;
  msg << source << ": row " << row << ": " << what;
  throw DataFormatError(msg.str());
}

template <typename T>
bool parse_unsigned(std::string_view field, T& value) {
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

bool parse_channel(std::string_view field, Channel& c) {
  if (field == "D1") {
    c = Channel::kD1;
  } else if (field == "D2") {
    c = Channel::kD2;
  } else if (field == "D3") {
    c = Channel::kD3;
  } else {
    return false;
  }
  return true;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

void write_events_csv(std::ostream& out, std::span<const ClickRecord> events) {
  out << kEventCsvHeader << '\n';
  for (const auto& e : events) {
    out << e.trial_index << ',' << channel_name(e.channel) << ',' << e.time_ns << '\n';
  }
}

std::vector<ClickRecord> read_events_csv(std::istream& in, const std::string& source) {
  std::vector<ClickRecord> events;
  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++row;
    std::string_view view = trim_cr(line);
    if (!saw_header) {
      if (view.empty()) fail(source, row, "missing header");
      if (view != kEventCsvHeader) {
        fail(source, row, "expected header '" + std::string(kEventCsvHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (view.empty()) continue;
    std::array<std::string_view, 3> fields;
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = view.find(',', start);
      if (n == fields.size()) fail(source, row, "too many columns");
      fields[n++] = view.substr(start, comma == std::string_view::npos ? comma : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n != 3) fail(source, row, "expected 3 columns");
    ClickRecord r{};
    if (!parse_unsigned(fields[0], r.trial_index)) fail(source, row, "bad trial_index");
    if (!parse_channel(fields[1], r.channel)) fail(source, row, "bad channel (want D1, D2 or D3)");
    if (!parse_unsigned(fields[2], r.time_ns)) fail(source, row, "bad time_ns");
    events.push_back(r);
  }
  return events;
}

void write_events_binary(std::ostream& out, std::span<const ClickRecord> events) {
  std::array<char, kBinaryRecordSize> buf{};
  for (const auto& e : events) {
    for (int i = 0; i < 8; ++i) {
      buf[i] = static_cast<char>((e.trial_index >> (8 * i)) & 0xFF);
    }
    buf[8] = static_cast<char>(e.channel);
    for (int i = 0; i < 4; ++i) {
      buf[9 + i] = static_cast<char>((e.time_ns >> (8 * i)) & 0xFF);
    }
    out.write(buf.data(), buf.size());
  }
}

std::vector<ClickRecord> read_events_binary(std::istream& in, const std::string& source) {
  std::vector<ClickRecord> events;
  std::array<unsigned char, kBinaryRecordSize> buf{};
  std::size_t record = 0;
  while (true) {
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    std::streamsize got = in.gcount();
    if (got == 0) break;
    if (got != static_cast<std::streamsize>(buf.size())) {
      std::ostringstream msg;
      msg << source << ": record " << record << ": truncated (" << got << " of "
          << kBinaryRecordSize << " bytes)";
      throw DataFormatError(msg.str());
    }
    ClickRecord r{};
    for (int i = 0; i < 8; ++i) {
      r.trial_index |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    if (buf[8] < 1 || buf[8] > 3) {
      std::ostringstream msg;
      msg << source << ": record " << record << ": bad channel byte " << int(buf[8]);
      throw DataFormatError(msg.str());
    }
    r.channel = static_cast<Channel>(buf[8]);
    for (int i = 0; i < 4; ++i) {
      r.time_ns |= static_cast<std::uint32_t>(buf[9 + i]) << (8 * i);
    }
    events.push_back(r);
    ++record;
  }
  return events;
}

EventFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? EventFormat::kBinary : EventFormat::kCsv;
}

void write_events(const std::filesystem::path& path, std::span<const ClickRecord> events,
                  EventFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  if (format == EventFormat::kBinary) {
    write_events_binary(out, events);
  } else {
    write_events_csv(out, events);
  }
}

std::vector<ClickRecord> read_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataFormatError(path.string() + ": cannot open");
  }
  if (format_for_path(path) == EventFormat::kBinary) {
    return read_events_binary(in, path.string());
  }
  return read_events_csv(in, path.string());
}

}  // namespace dlcz
