#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lsort/types.hpp"

namespace lsort {

// MSB-first bit packing. Bit i of the stream lives at byte i/8, mask 0x80>>(i%8).
class BitWriter {
public:
    void push_bit(bool b) {
        const size_t byte = nbits_ / 8;
        if (byte == bytes_.size()) bytes_.push_back(0);
        if (b) bytes_[byte] |= static_cast<uint8_t>(0x80u >> (nbits_ % 8));
        ++nbits_;
    }

    // Writes the low `width` bits of v, most significant first.
    void push_bits(uint64_t v, unsigned width) {
        for (unsigned i = width; i-- > 0;)
            push_bit((v >> i) & 1u);
    }

    size_t size_bits() const { return nbits_; }

    // Packed bytes; trailing pad bits of the last byte are '1' (idle level).
    std::vector<uint8_t> take_bytes_idle_padded() {
        const size_t pad = (8 - nbits_ % 8) % 8;
        for (size_t i = 0; i < pad; ++i) push_bit(true);
        return std::move(bytes_);
    }

    const std::vector<uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
    size_t nbits_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t nbits) : data_(data), nbits_(nbits) {}
    explicit BitReader(const std::vector<uint8_t>& bytes, size_t nbits)
        : data_(bytes.data()), nbits_(nbits) {}

    bool done() const { return pos_ >= nbits_; }
    size_t remaining() const { return nbits_ - pos_; }

    bool read_bit() {
        if (pos_ >= nbits_)
            throw TruncatedFrame("bit stream exhausted");
        const bool b = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
        ++pos_;
        return b;
    }

    uint64_t read_bits(unsigned width) {
        uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i)
            v = (v << 1) | (read_bit() ? 1u : 0u);
        return v;
    }

private:
    const uint8_t* data_;
    size_t nbits_;
    size_t pos_ = 0;
};

}  // namespace lsort
