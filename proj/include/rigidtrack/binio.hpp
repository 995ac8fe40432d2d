#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace rigidtrack {

// All on-disk binary payloads are little-endian scalars with no header.
// The host is required to match; this build does not byte-swap.
static_assert(std::endian::native == std::endian::little,
              "binary readers assume a little-endian host");

// Reads the whole file as a flat array of T. Throws Error(corruption) if the
// byte count is not a multiple of sizeof(T), Error(ingestion) if unreadable.
std::vector<float> read_f32_file(const std::filesystem::path& path);
std::vector<double> read_f64_file(const std::filesystem::path& path);
std::vector<int64_t> read_i64_file(const std::filesystem::path& path);
std::vector<uint8_t> read_u8_file(const std::filesystem::path& path);

// Same, but also checks the element count and reports expected vs actual.
std::vector<float> read_f32_file(const std::filesystem::path& path,
                                 size_t expected_count);
std::vector<double> read_f64_file(const std::filesystem::path& path,
                                  size_t expected_count);
std::vector<int64_t> read_i64_file(const std::filesystem::path& path,
                                   size_t expected_count);
std::vector<uint8_t> read_u8_file(const std::filesystem::path& path,
                                  size_t expected_count);

void write_f32_file(const std::filesystem::path& path,
                    const float* data, size_t count);
void write_f64_file(const std::filesystem::path& path,
                    const double* data, size_t count);
void write_i64_file(const std::filesystem::path& path,
                    const int64_t* data, size_t count);
void write_u8_file(const std::filesystem::path& path,
                   const uint8_t* data, size_t count);

void write_f32_file(const std::filesystem::path& path,
                    const std::vector<float>& data);
void write_f64_file(const std::filesystem::path& path,
                    const std::vector<double>& data);
void write_i64_file(const std::filesystem::path& path,
                    const std::vector<int64_t>& data);
void write_u8_file(const std::filesystem::path& path,
                   const std::vector<uint8_t>& data);

}  // namespace rigidtrack
