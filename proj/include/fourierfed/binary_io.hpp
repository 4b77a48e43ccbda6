#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "fourierfed/error.hpp"

namespace fourierfed::binio {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    put_bytes(out, &v, sizeof v);
}

// Bounds-checked little-endian reader; running past the end raises `code`.
class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size, ErrorCode code) : data_(data), size_(size), code_(code) {}

    template <typename T>
    T get() {
        T v;
        read(&v, sizeof v);
        return v;
    }

    void read(void* dst, std::size_t n) {
        if (n > size_ - pos_) throw Error(code_, "unexpected end of data");
        std::memcpy(dst, data_ + pos_, n);
        pos_ += n;
    }

    std::string string(std::size_t n) {
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return size_ - pos_; }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    ErrorCode code_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace fourierfed::binio
