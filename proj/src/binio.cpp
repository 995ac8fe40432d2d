#include "rigidtrack/binio.hpp"

#include <cstdio>
#include <fstream>

#include "rigidtrack/error.hpp"

namespace rigidtrack {

namespace {

template <typename T>
std::vector<T> read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorKind::ingestion, "cannot open " + path.string());
  std::streamsize bytes = in.tellg();
  if (bytes < 0) fail(ErrorKind::ingestion, "cannot stat " + path.string());
  if (static_cast<size_t>(bytes) % sizeof(T) != 0) {
    fail(ErrorKind::corruption,
         path.string() + ": " + std::to_string(bytes) +
             " bytes is not a multiple of element size " +
             std::to_string(sizeof(T)));
  }
  std::vector<T> out(static_cast<size_t>(bytes) / sizeof(T));
  in.seekg(0);
  if (!out.empty() &&
      !in.read(reinterpret_cast<char*>(out.data()), bytes)) {
    fail(ErrorKind::ingestion, "short read from " + path.string());
  }
  return out;
}

template <typename T>
std::vector<T> read_array(const std::filesystem::path& path,
                          size_t expected_count) {
  std::vector<T> out = read_array<T>(path);
  if (out.size() != expected_count) {
    fail(ErrorKind::corruption,
         path.string() + ": expected " + std::to_string(expected_count) +
             " elements (" + std::to_string(expected_count * sizeof(T)) +
             " bytes), found " + std::to_string(out.size()) + " (" +
             std::to_string(out.size() * sizeof(T)) + " bytes)");
  }
  return out;
}

// Writes via a temp file in the same directory, then renames. Readers never
// observe a partially written payload.
template <typename T>
void write_array(const std::filesystem::path& path, const T* data,
                 size_t count) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::ingestion, "cannot write " + tmp.string());
    if (count > 0) {
      out.write(reinterpret_cast<const char*>(data),
                static_cast<std::streamsize>(count * sizeof(T)));
    }
    out.flush();
    if (!out) fail(ErrorKind::ingestion, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    fail(ErrorKind::ingestion,
         "cannot rename " + tmp.string() + " to " + path.string() + ": " +
             ec.message());
  }
}

}  // namespace

std::vector<float> read_f32_file(const std::filesystem::path& path) {
  return read_array<float>(path);
}
std::vector<double> read_f64_file(const std::filesystem::path& path) {
  return read_array<double>(path);
}
std::vector<int64_t> read_i64_file(const std::filesystem::path& path) {
  return read_array<int64_t>(path);
}
std::vector<uint8_t> read_u8_file(const std::filesystem::path& path) {
  return read_array<uint8_t>(path);
}

std::vector<float> read_f32_file(const std::filesystem::path& path,
                                 size_t expected_count) {
  return read_array<float>(path, expected_count);
}
std::vector<double> read_f64_file(const std::filesystem::path& path,
                                  size_t expected_count) {
  return read_array<double>(path, expected_count);
}
std::vector<int64_t> read_i64_file(const std::filesystem::path& path,
                                   size_t expected_count) {
  return read_array<int64_t>(path, expected_count);
}
std::vector<uint8_t> read_u8_file(const std::filesystem::path& path,
                                  size_t expected_count) {
  return read_array<uint8_t>(path, expected_count);
}

void write_f32_file(const std::filesystem::path& path, const float* data,
                    size_t count) {
  write_array(path, data, count);
}
void write_f64_file(const std::filesystem::path& path, const double* data,
                    size_t count) {
  write_array(path, data, count);
}
void write_i64_file(const std::filesystem::path& path, const int64_t* data,
                    size_t count) {
  write_array(path, data, count);
}
void write_u8_file(const std::filesystem::path& path, const uint8_t* data,
                   size_t count) {
  write_array(path, data, count);
}

void write_f32_file(const std::filesystem::path& path,
                    const std::vector<float>& data) {
  write_array(path, data.data(), data.size());
}
void write_f64_file(const std::filesystem::path& path,
                    const std::vector<double>& data) {
  write_array(path, data.data(), data.size());
}
void write_i64_file(const std::filesystem::path& path,
                    const std::vector<int64_t>& data) {
  write_array(path, data.data(), data.size());
}
void write_u8_file(const std::filesystem::path& path,
                   const std::vector<uint8_t>& data) {
  write_array(path, data.data(), data.size());
}

}  // namespace rigidtrack
