#pragma once

// Multi-cell daily stores and CSV input.
//
// Binary store layout (all integers and floats little-endian):
//   "EVA1"                     4 bytes magic
//   version                    u16 (= 1)
//   cell count                 u32
//   per cell:
//     id length, id            u16, UTF-8 bytes
//     n_days                   u32
//     start year               i32
//     leap flag                u8 (1 = Gregorian days incl. Feb 29)
//     unit length, unit        u16, UTF-8 bytes: "<variable> [<units>]"
//     values                   n_days x f64

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "eva/errors.hpp"
#include "eva/series.hpp"

namespace eva {

inline constexpr char kStoreMagic[4] = {'E', 'V', 'A', '1'};
inline constexpr std::uint16_t kStoreVersion = 1;

/// Writes cells one at a time; the cell count is fixed up front.
class StoreWriter {
 public:
  StoreWriter(const std::string& path, std::uint32_t cell_count);
  void write(const DailySeries& series);
  /// Flushes and checks that exactly cell_count cells were written.
  void close();
  ~StoreWriter();

  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

 private:
  std::string path_;
  std::ofstream out_;
  std::uint32_t expected_;
  std::uint32_t written_ = 0;
  bool closed_ = false;
};

/// Streams cells one at a time so that only the current cell is resident.
class StoreReader {
 public:
  explicit StoreReader(const std::string& path);

  std::uint32_t cell_count() const { return count_; }
  /// Next cell, or nullopt after the last. Throws IoError on truncation or
  /// malformed headers, naming the byte offset.
  std::optional<DailySeries> next();

 private:
  void read_exact(void* dst, std::size_t n, const char* what);

  std::string path_;
  std::ifstream in_;
  std::uint32_t count_ = 0;
  std::uint32_t read_ = 0;
  std::uint64_t offset_ = 0;
  std::uint64_t file_size_ = 0;
};

void write_store(const std::string& path, const std::vector<DailySeries>& cells);
/// Reads every cell; on any error nothing is returned.
std::vector<DailySeries> read_store(const std::string& path);

/// CSV with header columns date (YYYY-MM-DD), cell_id, value, in any order
/// of rows. Each cell must start on January 1 and have no missing dates.
std::vector<DailySeries> read_csv(const std::string& path);
std::vector<DailySeries> read_csv(std::istream& in, const std::string& name = "<stream>");

/// Writes the date,cell_id,value layout read by read_csv.
void write_csv(std::ostream& out, const std::vector<DailySeries>& cells);

/// Unit-string encoding used in the store header.
std::string encode_unit_string(const DailySeries& s);
void decode_unit_string(const std::string& text, DailySeries& s);

}  // namespace eva
