#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "trm/errors.hpp"

namespace trm {

/// Dense row-major matrix of doubles. Rows index time, columns index space
/// throughout the library.
class Mat {
public:
    Mat() = default;

    Mat(int rows, int cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, value) {
        if (rows < 0 || cols < 0) throw InvalidArgument("Mat: negative dimensions");
    }

    Mat(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = static_cast<int>(init.size());
        cols_ = rows_ > 0 ? static_cast<int>(init.begin()->size()) : 0;
        data_.reserve(static_cast<size_t>(rows_) * cols_);
        for (const auto& row : init) {
            if (static_cast<int>(row.size()) != cols_)
                throw InvalidArgument("Mat: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    std::span<double> row(int i) { return {data_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)}; }
    std::span<const double> row(int i) const {
        return {data_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

}  // namespace trm
