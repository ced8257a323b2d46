#pragma once

// Byte-level plumbing shared by the GP5 reader and writer: little-endian
// primitives, the three GP string shapes, and latin-1 <-> UTF-8 transcoding
// (GP5 text is latin-1; everything else here speaks UTF-8).

#include <cstdint>
#include <string>
#include <vector>

#include "tabtok/gp5.hpp"

namespace tabtok::gp5detail {

inline std::string utf8_to_latin1(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        unsigned char byte = static_cast<unsigned char>(text[i]);
        if (byte < 0x80) {
            out.push_back(static_cast<char>(byte));
            ++i;
        } else if ((byte == 0xc2 || byte == 0xc3) && i + 1 < text.size() &&
                   (static_cast<unsigned char>(text[i + 1]) & 0xc0) == 0x80) {
            unsigned char low = static_cast<unsigned char>(text[i + 1]) & 0x3f;
            out.push_back(static_cast<char>(((byte & 0x1f) << 6) | low));
            i += 2;
        } else {
            // Outside latin-1 (or broken UTF-8): replace the whole sequence.
            out.push_back('?');
            ++i;
            while (i < text.size() &&
                   (static_cast<unsigned char>(text[i]) & 0xc0) == 0x80) {
                ++i;
            }
        }
    }
    return out;
}

inline std::string latin1_to_utf8(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        unsigned char byte = static_cast<unsigned char>(c);
        if (byte < 0x80) {
            out.push_back(c);
        } else {
            out.push_back(static_cast<char>(0xc0 | (byte >> 6)));
            out.push_back(static_cast<char>(0x80 | (byte & 0x3f)));
        }
    }
    return out;
}

class ByteWriter {
  public:
    std::vector<uint8_t> take() { return std::move(buffer_); }
    size_t size() const { return buffer_.size(); }

    void u8(int value) { buffer_.push_back(static_cast<uint8_t>(value & 0xff)); }
    void i8(int value) { u8(value); }
    void i16(int value) {
        u8(value);
        u8(value >> 8);
    }
    void i32(int value) {
        u8(value);
        u8(value >> 8);
        u8(value >> 16);
        u8(value >> 24);
    }
    void zeros(int count) {
        for (int i = 0; i < count; ++i) u8(0);
    }
    void raw(const std::string& bytes) {
        for (char c : bytes) buffer_.push_back(static_cast<uint8_t>(c));
    }

    // u8 length + fixed-capacity field, zero padded. UTF-8 in, latin-1 out.
    void byte_size_string(const std::string& text, int capacity) {
        std::string latin = utf8_to_latin1(text);
        if (static_cast<int>(latin.size()) > capacity) latin.resize(capacity);
        u8(static_cast<int>(latin.size()));
        raw(latin);
        zeros(capacity - static_cast<int>(latin.size()));
    }

    // i32 (length + 1), u8 length, then the bytes.
    void int_byte_size_string(const std::string& text) {
        std::string latin = utf8_to_latin1(text);
        if (latin.size() > 250) latin.resize(250);
        i32(static_cast<int>(latin.size()) + 1);
        u8(static_cast<int>(latin.size()));
        raw(latin);
    }

  private:
    std::vector<uint8_t> buffer_;
};

class ByteReader {
  public:
    explicit ByteReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

    size_t offset() const { return offset_; }
    size_t remaining() const { return bytes_.size() - offset_; }

    [[noreturn]] void fail(const std::string& message) const {
        throw Gp5Error(Gp5Error::Kind::malformed, offset_, message);
    }

    void need(size_t count) const {
        if (remaining() < count) fail("unexpected end of file");
    }

    uint8_t u8() {
        need(1);
        return bytes_[offset_++];
    }
    int8_t i8() { return static_cast<int8_t>(u8()); }
    int i16() {
        need(2);
        int value = bytes_[offset_] | (bytes_[offset_ + 1] << 8);
        offset_ += 2;
        return static_cast<int16_t>(value);
    }
    int i32() {
        need(4);
        uint32_t value = static_cast<uint32_t>(bytes_[offset_]) |
                         (static_cast<uint32_t>(bytes_[offset_ + 1]) << 8) |
                         (static_cast<uint32_t>(bytes_[offset_ + 2]) << 16) |
                         (static_cast<uint32_t>(bytes_[offset_ + 3]) << 24);
        offset_ += 4;
        return static_cast<int32_t>(value);
    }
    void skip(size_t count) {
        need(count);
        offset_ += count;
    }
    std::string raw(size_t count) {
        need(count);
        std::string out(reinterpret_cast<const char*>(bytes_.data()) + offset_,
                        count);
        offset_ += count;
        return out;
    }

    // Latin-1 text comes back as UTF-8.
    std::string byte_size_string(int capacity) {
        int length = u8();
        if (length > capacity) fail("string length exceeds field capacity");
        std::string text = raw(static_cast<size_t>(length));
        skip(static_cast<size_t>(capacity - length));
        return latin1_to_utf8(text);
    }

    std::string int_byte_size_string() {
        int size = i32();
        if (size < 1) fail("nonpositive string size");
        int length = u8();
        if (length > size - 1) fail("string length exceeds field size");
        std::string field = raw(static_cast<size_t>(size - 1));
        field.resize(static_cast<size_t>(length));
        return latin1_to_utf8(field);
    }

    void skip_int_size_string() {
        int size = i32();
        if (size < 0) fail("negative string size");
        skip(static_cast<size_t>(size));
    }

  private:
    const std::vector<uint8_t>& bytes_;
    size_t offset_ = 0;
};

}  // namespace tabtok::gp5detail
