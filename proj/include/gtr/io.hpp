#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "gtr/matrix.hpp"

namespace gtr {

/// Little-endian binary writer for the versioned artifact files.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("io_error: cannot write '" + path + "'");
    }

    void write_raw(const void* data, size_t bytes) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
        if (!out_) throw Error("io_error: short write");
    }

    void write_u32(uint32_t v) { write_raw(&v, sizeof(v)); }
    void write_u64(uint64_t v) { write_raw(&v, sizeof(v)); }
    void write_f32(float v) { write_raw(&v, sizeof(v)); }

    void write_string(const std::string& s) {
        write_u32(static_cast<uint32_t>(s.size()));
        write_raw(s.data(), s.size());
    }

private:
    std::ofstream out_;
};

/// Reader with byte-offset diagnostics on truncation or bad magic.
class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw Error("io_error: cannot open '" + path + "'");
    }

    void read_raw(void* data, size_t bytes) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
        if (static_cast<size_t>(in_.gcount()) != bytes)
            throw Error("corrupt_file: '" + path_ + "' truncated at byte offset " +
                        std::to_string(offset_ + static_cast<size_t>(in_.gcount())));
        offset_ += bytes;
    }

    uint32_t read_u32() {
        uint32_t v;
        read_raw(&v, sizeof(v));
        return v;
    }

    uint64_t read_u64() {
        uint64_t v;
        read_raw(&v, sizeof(v));
        return v;
    }

    std::string read_string() {
        uint32_t len = read_u32();
        std::string s(len, '\0');
        if (len > 0) read_raw(s.data(), len);
        return s;
    }

    void expect_magic(const char* magic, size_t len, const std::string& what) {
        std::string got(len, '\0');
        read_raw(got.data(), len);
        if (std::memcmp(got.data(), magic, len) != 0)
            throw Error("corrupt_file: bad " + what + " magic in '" + path_ + "' at byte offset 0");
    }

    void expect_eof() {
        char c;
        in_.read(&c, 1);
        if (!in_.eof())
            throw Error("corrupt_file: trailing bytes in '" + path_ + "' at byte offset " +
                        std::to_string(offset_));
    }

    size_t offset() const { return offset_; }

private:
    std::ifstream in_;
    std::string path_;
    size_t offset_ = 0;
};

}  // namespace gtr
