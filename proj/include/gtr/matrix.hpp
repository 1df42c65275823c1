#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtr {

/// Error type used across the library. Messages start with a stable
/// machine-parsable tag, e.g. "duplicate_id: ...".
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense row-major matrix. Vectors are 1xN or Nx1 as convenient.
template <typename T>
struct Mat {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(int64_t r, int64_t c) : rows(r), cols(c), data(static_cast<size_t>(r * c), T(0)) {}

    static Mat zeros(int64_t r, int64_t c) { return Mat(r, c); }

    T* row(int64_t r) { return data.data() + r * cols; }
    const T* row(int64_t r) const { return data.data() + r * cols; }

    T& at(int64_t r, int64_t c) { return data[r * cols + c]; }
    const T& at(int64_t r, int64_t c) const { return data[r * cols + c]; }

    int64_t size() const { return rows * cols; }
    bool empty() const { return data.empty(); }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Mat& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }

    template <typename U>
    Mat<U> cast() const {
        Mat<U> out(rows, cols);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

/// Dot product with double accumulation. The summation order (index 0..n-1)
/// is part of the contract: results are identical for any thread count.
template <typename T>
inline double dot(const T* a, const T* b, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

template <typename T>
inline double squared_l2(const T* a, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    return acc;
}

template <typename T>
inline double squared_distance(const T* a, const T* b, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

/// C = A * B. Serial; every output element is an ordered reduction.
template <typename T>
void matmul_serial(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    if (a.cols != b.rows) throw Error("shape_mismatch: matmul " + std::to_string(a.cols) + " vs " + std::to_string(b.rows));
    c = Mat<T>(a.rows, b.cols);
    for (int64_t i = 0; i < a.rows; ++i) {
        const T* ar = a.row(i);
        T* cr = c.row(i);
        for (int64_t k = 0; k < a.cols; ++k) {
            T av = ar[k];
            if (av == T(0)) continue;
            const T* br = b.row(k);
            for (int64_t j = 0; j < b.cols; ++j) cr[j] += av * br[j];
        }
    }
}

/// C = A * B, rows of C computed in parallel. Each element is the same
/// ordered reduction as the serial kernel, so the result is bitwise equal
/// to matmul_serial for any thread count.
template <typename T>
void matmul_omp(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    if (a.cols != b.rows) throw Error("shape_mismatch: matmul " + std::to_string(a.cols) + " vs " + std::to_string(b.rows));
    c = Mat<T>(a.rows, b.cols);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < a.rows; ++i) {
        const T* ar = a.row(i);
        T* cr = c.row(i);
        for (int64_t k = 0; k < a.cols; ++k) {
            T av = ar[k];
            if (av == T(0)) continue;
            const T* br = b.row(k);
            for (int64_t j = 0; j < b.cols; ++j) cr[j] += av * br[j];
        }
    }
}

/// C = A * B^T.
template <typename T>
void matmul_bt(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    if (a.cols != b.cols) throw Error("shape_mismatch: matmul_bt");
    c = Mat<T>(a.rows, b.rows);
    for (int64_t i = 0; i < a.rows; ++i)
        for (int64_t j = 0; j < b.rows; ++j)
            c.at(i, j) = static_cast<T>(dot(a.row(i), b.row(j), a.cols));
}

/// C += A^T * B (the usual weight-gradient contraction).
template <typename T>
void matmul_at_b_add(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    if (a.rows != b.rows) throw Error("shape_mismatch: matmul_at_b_add");
    if (c.rows != a.cols || c.cols != b.cols) throw Error("shape_mismatch: matmul_at_b_add output");
    for (int64_t k = 0; k < a.rows; ++k) {
        const T* ar = a.row(k);
        const T* br = b.row(k);
        for (int64_t i = 0; i < a.cols; ++i) {
            T av = ar[i];
            if (av == T(0)) continue;
            T* cr = c.row(i);
            for (int64_t j = 0; j < b.cols; ++j) cr[j] += av * br[j];
        }
    }
}

}  // namespace gtr
