#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ihr/errors.hpp"

namespace ihr::io {

struct Fnv1a {
    std::uint64_t value = 0xCBF29CE484222325ULL;

    void add_bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            value ^= b[i];
            value *= 0x100000001B3ULL;
        }
    }
    void add_u64(std::uint64_t v) { add_bytes(&v, sizeof v); }
    void add_doubles(const std::vector<double>& v) {
        add_bytes(v.data(), v.size() * sizeof(double));
    }
};

// Little-endian binary writer with an FNV-1a trailer.
class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoFailure("cannot open " + path + " for writing");
        path_ = path;
    }

    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void doubles(const std::vector<double>& v) { raw(v.data(), v.size() * sizeof(double)); }

    // Appends the checksum of everything written so far and closes.
    void finish_with_checksum() {
        std::uint64_t sum = hash_.value;
        out_.write(reinterpret_cast<const char*>(&sum), sizeof sum);
        out_.close();
        if (!out_) throw IoFailure("write failed for " + path_);
    }

private:
    void raw(const void* p, std::size_t n) {
        hash_.add_bytes(p, n);
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) throw IoFailure("write failed for " + path_);
    }

    std::ofstream out_;
    std::string path_;
    Fnv1a hash_;
};

// Reads the whole file up front; the final 8 bytes are the checksum trailer.
class Reader {
public:
    explicit Reader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoFailure("cannot open " + path);
        in.seekg(0, std::ios::end);
        const std::streamoff size = in.tellg();
        in.seekg(0, std::ios::beg);
        if (size < static_cast<std::streamoff>(sizeof(std::uint64_t)))
            throw CorruptFile(path + " is too small");
        bytes_.resize(static_cast<std::size_t>(size));
        in.read(reinterpret_cast<char*>(bytes_.data()), size);
        if (!in) throw IoFailure("read failed for " + path);
        payload_end_ = bytes_.size() - sizeof(std::uint64_t);
        path_ = path;
    }

    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    double f64() { return get<double>(); }
    std::string str() {
        std::uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }
    void doubles(std::vector<double>& v) {
        need(v.size() * sizeof(double));
        std::memcpy(v.data(), bytes_.data() + pos_, v.size() * sizeof(double));
        pos_ += v.size() * sizeof(double);
    }

    void verify_checksum() {
        Fnv1a h;
        h.add_bytes(bytes_.data(), payload_end_);
        std::uint64_t stored;
        std::memcpy(&stored, bytes_.data() + payload_end_, sizeof stored);
        if (h.value != stored) throw CorruptFile("checksum mismatch in " + path_);
        if (pos_ != payload_end_) throw CorruptFile("trailing payload bytes in " + path_);
    }

private:
    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void need(std::size_t n) {
        if (pos_ + n > payload_end_) throw CorruptFile(path_ + " is truncated");
    }

    std::vector<unsigned char> bytes_;
    std::size_t pos_ = 0;
    std::size_t payload_end_ = 0;
    std::string path_;
};

} // namespace ihr::io
