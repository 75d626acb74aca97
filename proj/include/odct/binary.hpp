#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "odct/error.hpp"

namespace odct {

static_assert(std::endian::native == std::endian::little,
              "snapshot formats are little-endian");

/// Fixed-width little-endian writer for the snapshot/checkpoint formats.
/// Byte-stable: identical values always serialize to identical bytes.
class BinWriter {
public:
    explicit BinWriter(const std::filesystem::path& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw InputError("cannot open for writing: " + path.string());
    }

    void magic(std::string_view tag) { out_.write(tag.data(), tag.size()); }

    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void i32(std::int32_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }

    void f64_span(std::span<const double> v) { raw(v.data(), v.size() * sizeof(double)); }
    void i32_span(std::span<const std::int32_t> v) {
        raw(v.data(), v.size() * sizeof(std::int32_t));
    }
    void i64_span(std::span<const std::int64_t> v) {
        raw(v.data(), v.size() * sizeof(std::int64_t));
    }

    /// Length-prefixed byte string.
    void str(std::string_view s) {
        u64(s.size());
        raw(s.data(), s.size());
    }

    void finish() {
        out_.flush();
        if (!out_) throw InputError("write failed: " + path_.string());
    }

private:
    void raw(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }

    std::filesystem::path path_;
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::filesystem::path& path)
        : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw InputError("cannot open for reading: " + path.string());
    }

    void expect_magic(std::string_view tag) {
        std::string got(tag.size(), '\0');
        raw(got.data(), got.size());
        if (got != tag) {
            throw InputError(path_.string() + ": bad header, expected \"" +
                             std::string(tag) + "\"");
        }
    }

    std::uint64_t u64() { return read_as<std::uint64_t>(); }
    std::int64_t i64() { return read_as<std::int64_t>(); }
    std::int32_t i32() { return read_as<std::int32_t>(); }
    double f64() { return read_as<double>(); }

    void f64_span(std::span<double> v) { raw(v.data(), v.size() * sizeof(double)); }
    void i32_span(std::span<std::int32_t> v) {
        raw(v.data(), v.size() * sizeof(std::int32_t));
    }
    void i64_span(std::span<std::int64_t> v) {
        raw(v.data(), v.size() * sizeof(std::int64_t));
    }

    std::string str() {
        const std::uint64_t n = u64();
        if (n > (1ull << 32)) throw InputError(path_.string() + ": corrupt string length");
        std::string s(static_cast<std::size_t>(n), '\0');
        raw(s.data(), s.size());
        return s;
    }

private:
    template <class T>
    T read_as() {
        T v;
        raw(&v, sizeof v);
        return v;
    }

    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw InputError(path_.string() + ": truncated file");
        }
    }

    std::filesystem::path path_;
    std::ifstream in_;
};

}  // namespace odct
