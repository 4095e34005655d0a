#pragma once

/// @file binio.hpp
/// @brief Little-endian binary readers/writers for artifact files.
///
/// All on-disk numeric fields are little-endian; doubles are IEEE-754
/// binary64. Matrices are stored row-major with a (rows, cols) prefix.

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace whpa {

static_assert(std::endian::native == std::endian::little,
              "artifact file formats assume a little-endian host");

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path)
        : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void put_bytes(const void* data, std::size_t len) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    }
    void put_u8(std::uint8_t v) { put_bytes(&v, 1); }
    void put_u32(std::uint32_t v) { put_bytes(&v, 4); }
    void put_u64(std::uint64_t v) { put_bytes(&v, 8); }
    void put_i64(std::int64_t v) { put_bytes(&v, 8); }
    void put_f64(double v) { put_bytes(&v, 8); }

    void put_string(const std::string& s) {
        put_u64(s.size());
        put_bytes(s.data(), s.size());
    }

    void put_vector(const Eigen::VectorXd& v) {
        put_u64(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(v[i]);
    }

    void put_matrix(const Eigen::MatrixXd& m) {
        put_u64(static_cast<std::uint64_t>(m.rows()));
        put_u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(m(r, c));
    }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path)
        : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw std::runtime_error("cannot open for reading: " + path);
    }

    void get_bytes(void* data, std::size_t len) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
        if (in_.gcount() != static_cast<std::streamsize>(len))
            throw std::runtime_error("truncated file: " + path_);
    }
    std::uint8_t get_u8() { std::uint8_t v; get_bytes(&v, 1); return v; }
    std::uint32_t get_u32() { std::uint32_t v; get_bytes(&v, 4); return v; }
    std::uint64_t get_u64() { std::uint64_t v; get_bytes(&v, 8); return v; }
    std::int64_t get_i64() { std::int64_t v; get_bytes(&v, 8); return v; }
    double get_f64() { double v; get_bytes(&v, 8); return v; }

    std::string get_string() {
        const auto len = get_u64();
        std::string s(len, '\0');
        get_bytes(s.data(), len);
        return s;
    }

    Eigen::VectorXd get_vector() {
        const auto n = get_u64();
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get_f64();
        return v;
    }

    Eigen::MatrixXd get_matrix() {
        const auto rows = get_u64();
        const auto cols = get_u64();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64();
        return m;
    }

    void seek(std::uint64_t pos) { in_.seekg(static_cast<std::streamoff>(pos)); }
    std::uint64_t tell() { return static_cast<std::uint64_t>(in_.tellg()); }

private:
    std::ifstream in_;
    std::string path_;
};

}  // namespace whpa
