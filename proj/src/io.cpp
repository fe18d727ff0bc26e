#include "eva/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

namespace eva {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(u >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(const unsigned char* bytes) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(U(bytes[i]) << (8 * i));
  return static_cast<T>(u);
}

void put_string(std::ostream& out, const std::string& s, const char* what) {
  if (s.size() > 0xFFFF) throw IoError(std::string(what) + " longer than 65535 bytes");
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Date {
  int year;
  int month;
  int day;
  auto operator<=>(const Date&) const = default;
};

constexpr std::array<int, 12> kMonthDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

int month_length(int year, int month, bool leap_days) {
  return (month == 2 && leap_days && is_leap_year(year)) ? 29 : kMonthDays[month - 1];
}

Date next_day(Date d, bool leap_days) {
  if (++d.day > month_length(d.year, d.month, leap_days)) {
    d.day = 1;
    if (++d.month > 12) {
      d.month = 1;
      ++d.year;
    }
  }
  return d;
}

std::string format_date(const Date& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  Date d{};
  auto num = [&](std::size_t pos, std::size_t len, int& out) {
    const auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return r.ec == std::errc() && r.ptr == s.data() + pos + len;
  };
  if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
  if (d.month < 1 || d.month > 12 || d.day < 1) return std::nullopt;
  if (d.day > month_length(d.year, d.month, true)) return std::nullopt;
  return d;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string encode_unit_string(const DailySeries& s) {
  if (s.variable.empty()) return s.units.empty() ? std::string() : "[" + s.units + "]";
  return s.variable + " [" + s.units + "]";
}

void decode_unit_string(const std::string& text, DailySeries& s) {
  const auto open = text.rfind('[');
  if (open == std::string::npos || text.back() != ']') {
    s.variable = text;
    s.units.clear();
    return;
  }
  s.units = text.substr(open + 1, text.size() - open - 2);
  std::string var = text.substr(0, open);
  while (!var.empty() && var.back() == ' ') var.pop_back();
  s.variable = var;
}

// ---------------------------------------------------------------------------
// StoreWriter

StoreWriter::StoreWriter(const std::string& path, std::uint32_t cell_count)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), expected_(cell_count) {
  if (!out_) throw IoError("cannot open '" + path + "' for writing");
  out_.write(kStoreMagic, 4);
  put_le<std::uint16_t>(out_, kStoreVersion);
  put_le<std::uint32_t>(out_, cell_count);
}

void StoreWriter::write(const DailySeries& s) {
  if (written_ >= expected_)
    throw IoError("store '" + path_ + "': more cells written than declared");
  if (s.values.size() > 0xFFFFFFFFu) throw IoError("series '" + s.id + "' too long for store");
  put_string(out_, s.id, "cell id");
  put_le<std::uint32_t>(out_, static_cast<std::uint32_t>(s.values.size()));
  put_le<std::int32_t>(out_, s.start_year);
  put_le<std::uint8_t>(out_, s.leap_days ? 1 : 0);
  put_string(out_, encode_unit_string(s), "unit string");
  if constexpr (std::endian::native == std::endian::little) {
    out_.write(reinterpret_cast<const char*>(s.values.data()),
               static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  } else {
    for (double v : s.values) put_le<std::uint64_t>(out_, std::bit_cast<std::uint64_t>(v));
  }
  if (!out_) throw IoError("write failed on '" + path_ + "'");
  ++written_;
}

void StoreWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.flush();
  if (!out_) throw IoError("write failed on '" + path_ + "'");
  out_.close();
  if (written_ != expected_)
    throw IoError("store '" + path_ + "': " + std::to_string(written_) + " of " +
                  std::to_string(expected_) + " cells written");
}

StoreWriter::~StoreWriter() {
  try {
    if (!closed_) {
      closed_ = true;
      out_.close();
    }
  } catch (...) {
  }
}

// ---------------------------------------------------------------------------
// StoreReader

StoreReader::StoreReader(const std::string& path)
    : path_(path), in_(path, std::ios::binary | std::ios::ate) {
  if (!in_) throw IoError("cannot open '" + path + "'");
  file_size_ = static_cast<std::uint64_t>(in_.tellg());
  in_.seekg(0);
  char magic[4];
  read_exact(magic, 4, "magic");
  if (std::memcmp(magic, kStoreMagic, 4) != 0) throw IoError("'" + path + "': bad magic", 0);
  unsigned char buf[6];
  read_exact(buf, 6, "header");
  const auto version = get_le<std::uint16_t>(buf);
  if (version != kStoreVersion)
    throw IoError("'" + path + "': unsupported version " + std::to_string(version), 4);
  count_ = get_le<std::uint32_t>(buf + 2);
}

void StoreReader::read_exact(void* dst, std::size_t n, const char* what) {
  if (offset_ + n > file_size_)
    throw IoError("'" + path_ + "': truncated while reading " + what, offset_);
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (in_.gcount() != static_cast<std::streamsize>(n))
    throw IoError("'" + path_ + "': short read of " + what, offset_);
  offset_ += n;
}

std::optional<DailySeries> StoreReader::next() {
  if (read_ >= count_) {
    if (offset_ != file_size_)
      throw IoError("'" + path_ + "': trailing bytes after last cell", offset_);
    return std::nullopt;
  }
  DailySeries s;
  unsigned char b2[2];
  unsigned char b4[4];

  read_exact(b2, 2, "id length");
  s.id.resize(get_le<std::uint16_t>(b2));
  read_exact(s.id.data(), s.id.size(), "cell id");
  read_exact(b4, 4, "day count");
  const auto n_days = get_le<std::uint32_t>(b4);
  read_exact(b4, 4, "start year");
  s.start_year = get_le<std::int32_t>(b4);
  unsigned char leap;
  read_exact(&leap, 1, "leap flag");
  if (leap > 1) throw IoError("'" + path_ + "': invalid leap flag", offset_ - 1);
  s.leap_days = leap == 1;
  read_exact(b2, 2, "unit length");
  std::string unit(get_le<std::uint16_t>(b2), '\0');
  read_exact(unit.data(), unit.size(), "unit string");
  decode_unit_string(unit, s);

  const std::uint64_t bytes = std::uint64_t{n_days} * sizeof(double);
  if (offset_ + bytes > file_size_)
    throw IoError("'" + path_ + "': truncated values of cell '" + s.id + "'", offset_);
  s.values.resize(n_days);
  read_exact(s.values.data(), bytes, "values");
  if constexpr (std::endian::native != std::endian::little) {
    for (double& v : s.values) {
      unsigned char raw[8];
      std::memcpy(raw, &v, 8);
      v = std::bit_cast<double>(get_le<std::uint64_t>(raw));
    }
  }
  ++read_;
  return s;
}

void write_store(const std::string& path, const std::vector<DailySeries>& cells) {
  StoreWriter w(path, static_cast<std::uint32_t>(cells.size()));
  for (const auto& c : cells) w.write(c);
  w.close();
}

std::vector<DailySeries> read_store(const std::string& path) {
  StoreReader r(path);
  std::vector<DailySeries> out;
  out.reserve(r.cell_count());
  while (auto s = r.next()) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<DailySeries> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in, path);
}

std::vector<DailySeries> read_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + name + "': empty CSV");
  const auto header = split_commas(line);
  int c_date = -1;
  int c_cell = -1;
  int c_value = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "date") c_date = i;
    if (header[i] == "cell_id") c_cell = i;
    if (header[i] == "value") c_value = i;
  }
  if (c_date < 0 || c_cell < 0 || c_value < 0)
    throw IoError("'" + name + "': header must name columns date, cell_id, value");
  const auto width = static_cast<std::size_t>(std::max({c_date, c_cell, c_value}) + 1);

  std::map<std::string, std::map<Date, double>> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    const std::string where = "'" + name + "' line " + std::to_string(line_no);
    if (fields.size() < width) throw IoError(where + ": expected " + std::to_string(width) +
                                             " columns");
    const auto date = parse_date(fields[c_date]);
    if (!date) throw IoError(where + ": bad date '" + std::string(fields[c_date]) + "'");
    double value = 0;
    const auto vf = fields[c_value];
    const auto r = std::from_chars(vf.data(), vf.data() + vf.size(), value);
    if (r.ec != std::errc() || r.ptr != vf.data() + vf.size())
      throw IoError(where + ": bad value '" + std::string(vf) + "'");
    const std::string cell(fields[c_cell]);
    if (!cells[cell].emplace(*date, value).second)
      throw IoError(where + ": duplicate row for cell " + cell + ", " + format_date(*date));
  }

  std::vector<DailySeries> out;
  for (auto& [cell, rows] : cells) {
    const Date first = rows.begin()->first;
    const Date last = rows.rbegin()->first;
    if (first.month != 1 || first.day != 1)
      throw IoError("'" + name + "': cell " + cell + " starts on " + format_date(first) +
                    ", series must start on January 1");
    const bool leap = std::any_of(rows.begin(), rows.end(), [](const auto& kv) {
      return kv.first.month == 2 && kv.first.day == 29;
    });
    DailySeries s;
    s.id = cell;
    s.start_year = first.year;
    s.leap_days = leap;
    std::vector<std::string> missing;
    for (Date d = first; d <= last; d = next_day(d, leap)) {
      const auto it = rows.find(d);
      if (it == rows.end()) {
        missing.push_back("cell " + cell + ", " + format_date(d));
        continue;
      }
      s.values.push_back(it->second);
    }
    if (!missing.empty()) {
      std::string msg = "'" + name + "': missing dates: ";
      for (std::size_t i = 0; i < missing.size() && i < 20; ++i)
        msg += (i ? "; " : "") + missing[i];
      if (missing.size() > 20) msg += "; ... (" + std::to_string(missing.size()) + " total)";
      throw IoError(msg);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<DailySeries>& cells) {
  out << "date,cell_id,value\n";
  char buf[64];
  for (const auto& s : cells) {
    Date d{s.start_year, 1, 1};
    for (double v : s.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << format_date(d) << ',' << s.id << ',' << buf << '\n';
      d = next_day(d, s.leap_days);
    }
  }
}

}  // namespace eva
