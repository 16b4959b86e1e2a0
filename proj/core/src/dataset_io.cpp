#include "gcm/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "gcm/error.hpp"
#include "gcm/format.hpp"
#include "group_validation.hpp"

namespace gcm {

namespace {

constexpr std::size_t kReadBufferBytes = std::size_t{1} << 20;

void put_u64(char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u32(char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void malformed(const std::string& what, std::int64_t line) {
  throw DataError(DataErrorKind::kMalformedRecord, what, line);
}

template <class T>
T parse_number(std::string_view field, const char* name, std::int64_t line) {
  T value{};
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    malformed(std::string("cannot parse ") + name + " '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

DatasetFormat detect_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::kIo, "cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kBinaryMagic) {
    return DatasetFormat::kBinary;
  }
  return DatasetFormat::kText;
}

Dataset read_text(std::istream& in) {
  std::string line;
  std::int64_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<Candidate> candidates;
  std::unordered_map<std::uint64_t, detail::GroupValidator> groups;
  std::vector<std::uint64_t> group_order;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_csv(view);
    if (!have_header) {
      if (fields.size() < 4 || fields[0] != "group_id" || fields[1] != "label" ||
          fields[2] != "is_key") {
        throw DataError(DataErrorKind::kBadHeader,
                        "expected header 'group_id,label,is_key,f1,...,fd'", line_no);
      }
      dim = fields.size() - 3;
      have_header = true;
      continue;
    }
    if (fields.size() != dim + 3) {
      malformed("expected " + std::to_string(dim + 3) + " fields, found " +
                    std::to_string(fields.size()),
                line_no);
    }
    Candidate c;
    c.group_id = parse_number<std::uint64_t>(fields[0], "group_id", line_no);
    c.label = parse_number<int>(fields[1], "label", line_no);
    if (c.label != 1 && c.label != -1) malformed("label must be +1 or -1", line_no);
    const int key = parse_number<int>(fields[2], "is_key", line_no);
    if (key != 0 && key != 1) malformed("is_key must be 0 or 1", line_no);
    c.is_key = key == 1;
    c.features.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      c.features.push_back(parse_number<double>(fields[3 + j], "feature", line_no));
    }
    auto [it, inserted] = groups.try_emplace(c.group_id);
    if (inserted) {
      it->second.start(c.group_id, line_no);
      group_order.push_back(c.group_id);
    }
    it->second.add(c.label, c.is_key, line_no);
    candidates.push_back(std::move(c));
  }
  if (!have_header) throw DataError(DataErrorKind::kBadHeader, "missing header line", line_no);
  for (std::uint64_t gid : group_order) groups.at(gid).finish();
  return Dataset::from_candidates(dim, std::move(candidates));
}

void write_text(const Dataset& data, std::ostream& out) {
  out << "group_id,label,is_key";
  for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << (j + 1);
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out << data.group_id(r) << ',' << (data.label(r) > 0 ? "+1" : "-1") << ','
        << (data.is_key(r) ? 1 : 0);
    for (double v : data.features(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<DatasetFormat> format) {
  const DatasetFormat fmt = format ? *format : detect_format(path);
  if (fmt == DatasetFormat::kText) {
    std::ifstream in(path);
    if (!in) throw DataError(DataErrorKind::kIo, "cannot open " + path.string());
    return read_text(in);
  }
  BinaryDatasetReader reader(path);
  const std::size_t d = reader.dim();
  const auto n = static_cast<std::size_t>(reader.header().rows);
  std::vector<std::uint64_t> gids;
  std::vector<std::int8_t> labels;
  std::vector<std::uint8_t> keys;
  std::vector<double> features;
  gids.reserve(n);
  labels.reserve(n);
  keys.reserve(n);
  features.reserve(n * d);
  GroupBuffer buf;
  while (reader.next_group(buf)) {
    for (std::size_t i = 0; i < buf.rows; ++i) {
      gids.push_back(buf.group_id);
      labels.push_back(static_cast<std::int8_t>(buf.label));
      keys.push_back(i == buf.key_offset ? 1 : 0);
    }
    features.insert(features.end(), buf.features.begin(), buf.features.end());
  }
  return Dataset(d, std::move(gids), std::move(labels), std::move(keys), std::move(features));
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, DatasetFormat format) {
  if (format == DatasetFormat::kText) {
    std::ofstream out(path);
    if (!out) throw DataError(DataErrorKind::kIo, "cannot write " + path.string());
    write_text(data, out);
    if (!out) throw DataError(DataErrorKind::kIo, "write failed for " + path.string());
    return;
  }
  BinaryDatasetWriter writer(path, data.dim());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    writer.write(data.group_id(r), data.label(r), data.is_key(r), data.features(r));
  }
  writer.close();
}

// --- BinaryDatasetReader ---------------------------------------------------

BinaryDatasetReader::BinaryDatasetReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw DataError(DataErrorKind::kIo, "cannot open " + path.string());
  char head[kBinaryHeaderBytes];
  in_.read(head, sizeof(head));
  if (in_.gcount() != static_cast<std::streamsize>(sizeof(head)) ||
      std::memcmp(head, kBinaryMagic.data(), kBinaryMagic.size()) != 0) {
    throw DataError(DataErrorKind::kBadHeader, path.string() + " is not a binary GCM dataset");
  }
  header_.version = get_u32(head + 8);
  header_.dim = get_u32(head + 12);
  header_.rows = get_u64(head + 16);
  if (header_.version != kBinaryVersion) {
    throw DataError(DataErrorKind::kBadHeader,
                    "unsupported binary dataset version " + std::to_string(header_.version));
  }
  if (header_.dim == 0) throw DataError(DataErrorKind::kBadHeader, "feature count is zero");
  const std::size_t rec = binary_record_bytes(header_.dim);
  io_buffer_.resize(std::max(kReadBufferBytes, rec));
  pending_features_.resize(header_.dim);
}

void BinaryDatasetReader::rewind() {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kBinaryHeaderBytes));
  io_pos_ = io_len_ = 0;
  have_pending_ = false;
  record_index_ = 0;
  last_group_.reset();
}

bool BinaryDatasetReader::read_record() {
  const std::size_t rec = binary_record_bytes(header_.dim);
  if (io_len_ - io_pos_ < rec) {
    const std::size_t left = io_len_ - io_pos_;
    std::memmove(io_buffer_.data(), io_buffer_.data() + io_pos_, left);
    in_.read(io_buffer_.data() + left, static_cast<std::streamsize>(io_buffer_.size() - left));
    io_len_ = left + static_cast<std::size_t>(in_.gcount());
    io_pos_ = 0;
    if (io_len_ == 0) {
      if (record_index_ != header_.rows) {
        malformed("header declares " + std::to_string(header_.rows) + " rows but file has " +
                      std::to_string(record_index_),
                  static_cast<std::int64_t>(record_index_));
      }
      return false;
    }
    if (io_len_ < rec) malformed("truncated record", static_cast<std::int64_t>(record_index_));
  }
  const char* p = io_buffer_.data() + io_pos_;
  pending_group_ = get_u64(p);
  pending_label_ = static_cast<std::int8_t>(p[8]);
  const auto key = static_cast<unsigned char>(p[9]);
  if (key > 1) malformed("is_key byte must be 0 or 1", static_cast<std::int64_t>(record_index_));
  pending_key_ = key == 1;
  for (std::size_t j = 0; j < header_.dim; ++j) {
    pending_features_[j] = std::bit_cast<double>(get_u64(p + 10 + 8 * j));
  }
  io_pos_ += rec;
  ++record_index_;
  if (record_index_ > header_.rows) {
    malformed("file holds more rows than the header declares",
              static_cast<std::int64_t>(record_index_ - 1));
  }
  return true;
}

bool BinaryDatasetReader::next_group(GroupBuffer& out) {
  if (!have_pending_) {
    have_pending_ = read_record();
    if (!have_pending_) return false;
  }
  const std::uint64_t gid = pending_group_;
  const auto first = static_cast<std::int64_t>(record_index_ - 1);
  if (last_group_ && gid <= *last_group_) {
    throw DataError(DataErrorKind::kUnsortedGroups,
                    "records are not grouped by ascending group id", first,
                    static_cast<std::int64_t>(gid));
  }
  out.group_id = gid;
  out.rows = 0;
  out.key_offset = kNoKey;
  out.features.clear();
  detail::GroupValidator validator;
  validator.start(gid, first);
  do {
    validator.add(pending_label_, pending_key_, static_cast<std::int64_t>(record_index_ - 1));
    if (pending_key_) out.key_offset = out.rows;
    out.features.insert(out.features.end(), pending_features_.begin(), pending_features_.end());
    ++out.rows;
    have_pending_ = read_record();
  } while (have_pending_ && pending_group_ == gid);
  validator.finish();
  out.label = validator.label();
  last_group_ = gid;
  peak_group_rows_ = std::max(peak_group_rows_, out.rows);
  return true;
}

// --- BinaryDatasetWriter ---------------------------------------------------

BinaryDatasetWriter::BinaryDatasetWriter(const std::filesystem::path& path, std::size_t dim)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), dim_(dim) {
  if (!out_) throw DataError(DataErrorKind::kIo, "cannot write " + path.string());
  if (dim == 0) throw ConfigError("binary dataset needs at least one feature");
  char head[kBinaryHeaderBytes];
  std::memcpy(head, kBinaryMagic.data(), kBinaryMagic.size());
  put_u32(head + 8, kBinaryVersion);
  put_u32(head + 12, static_cast<std::uint32_t>(dim));
  put_u64(head + 16, 0);
  out_.write(head, sizeof(head));
  record_.resize(binary_record_bytes(dim));
}

BinaryDatasetWriter::~BinaryDatasetWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void BinaryDatasetWriter::write(std::uint64_t group_id, int label, bool is_key,
                                std::span<const double> features) {
  if (features.size() != dim_) throw DimensionError(dim_, features.size());
  if (last_group_ && group_id < *last_group_) {
    throw DataError(DataErrorKind::kUnsortedGroups, "rows must be written in group order",
                    static_cast<std::int64_t>(rows_), static_cast<std::int64_t>(group_id));
  }
  last_group_ = group_id;
  char* p = record_.data();
  put_u64(p, group_id);
  p[8] = static_cast<char>(static_cast<std::int8_t>(label));
  p[9] = static_cast<char>(is_key ? 1 : 0);
  for (std::size_t j = 0; j < dim_; ++j) put_u64(p + 10 + 8 * j, std::bit_cast<std::uint64_t>(features[j]));
  out_.write(record_.data(), static_cast<std::streamsize>(record_.size()));
  ++rows_;
}

void BinaryDatasetWriter::close() {
  if (closed_) return;
  closed_ = true;
  char count[8];
  put_u64(count, rows_);
  out_.seekp(16);
  out_.write(count, sizeof(count));
  out_.close();
  if (!out_) throw DataError(DataErrorKind::kIo, "write failed for " + path_.string());
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::kIo, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace gcm
