#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gcm/model.hpp"

namespace gcm {

// Text format: CSV with header `group_id,label,is_key,f1,...,fd`, one
// candidate per line, label in {+1, -1} (also accepts 1), is_key in {0, 1}.
//
// Binary format (all fields little-endian):
//   header  : magic "GCMDATA\0" (8 bytes), version u32, d u32, row count u64
//   record  : group_id u64, label i8, is_key u8, d x f64
// Records are sorted by group id so each group is a contiguous block.
enum class DatasetFormat { kText, kBinary };

inline constexpr std::array<char, 8> kBinaryMagic = {'G', 'C', 'M', 'D', 'A', 'T', 'A', '\0'};
inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderBytes = 24;

inline constexpr std::size_t binary_record_bytes(std::size_t dim) { return 10 + 8 * dim; }

// Sniffs the magic bytes; anything else is treated as text.
DatasetFormat detect_format(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<DatasetFormat> format = std::nullopt);
void save_dataset(const Dataset& data, const std::filesystem::path& path,
                  DatasetFormat format);

// Text loader sorts rows by group id on ingest (stable, so within-group
// order is preserved). Parse errors carry 1-based line numbers.
Dataset read_text(std::istream& in);
void write_text(const Dataset& data, std::ostream& out);

struct BinaryHeader {
  std::uint32_t version = kBinaryVersion;
  std::uint32_t dim = 0;
  std::uint64_t rows = 0;
};

// One group's rows, reused between reads so memory stays bounded by the
// largest group.
struct GroupBuffer {
  std::uint64_t group_id = 0;
  int label = -1;
  std::size_t rows = 0;
  std::size_t key_offset = kNoKey;  // offset inside the group
  std::vector<double> features;     // rows x dim, row-major

  std::span<const double> row(std::size_t i, std::size_t dim) const {
    return {features.data() + i * dim, dim};
  }
};

// Single-pass reader yielding one validated group at a time.
class BinaryDatasetReader {
 public:
  explicit BinaryDatasetReader(const std::filesystem::path& path);

  const BinaryHeader& header() const noexcept { return header_; }
  std::size_t dim() const noexcept { return header_.dim; }

  // Reads the next group into `out`. Returns false at end of stream.
  bool next_group(GroupBuffer& out);

  // Seeks back to the first record.
  void rewind();

  std::uint64_t rows_read() const noexcept { return record_index_; }
  // Largest number of rows held in a GroupBuffer so far.
  std::size_t peak_group_rows() const noexcept { return peak_group_rows_; }
  // Bytes of the fixed read-ahead buffer.
  std::size_t io_buffer_bytes() const noexcept { return io_buffer_.size(); }

 private:
  bool read_record();

  std::filesystem::path path_;
  std::ifstream in_;
  BinaryHeader header_;
  std::vector<char> io_buffer_;
  std::size_t io_pos_ = 0;
  std::size_t io_len_ = 0;

  // One-record lookahead.
  bool have_pending_ = false;
  std::uint64_t pending_group_ = 0;
  int pending_label_ = 0;
  bool pending_key_ = false;
  std::vector<double> pending_features_;

  std::uint64_t record_index_ = 0;
  std::optional<std::uint64_t> last_group_;
  std::size_t peak_group_rows_ = 0;
};

// Streaming writer; rows must arrive grouped by ascending group id. The row
// count in the header is patched by close().
class BinaryDatasetWriter {
 public:
  BinaryDatasetWriter(const std::filesystem::path& path, std::size_t dim);
  ~BinaryDatasetWriter();

  BinaryDatasetWriter(const BinaryDatasetWriter&) = delete;
  BinaryDatasetWriter& operator=(const BinaryDatasetWriter&) = delete;

  void write(std::uint64_t group_id, int label, bool is_key, std::span<const double> features);
  void close();

  std::uint64_t rows() const noexcept { return rows_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t dim_;
  std::uint64_t rows_ = 0;
  std::optional<std::uint64_t> last_group_;
  std::vector<char> record_;
  bool closed_ = false;
};

// FNV-1a 64-bit digest of a file's bytes, used to fingerprint inputs.
std::uint64_t file_digest(const std::filesystem::path& path);

}  // namespace gcm
