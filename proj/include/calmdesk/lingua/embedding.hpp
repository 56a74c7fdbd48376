#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "calmdesk/errors.hpp"

namespace calmdesk::lingua {

// Word vectors stored as rows of a dense matrix.
template <typename Scalar>
class BasicEmbeddingTable {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicEmbeddingTable() = default;

    BasicEmbeddingTable(std::vector<std::string> words, Matrix vectors) : vectors_(std::move(vectors)) {
        if (static_cast<Eigen::Index>(words.size()) != vectors_.rows())
            throw DimensionMismatchError("word count does not match vector rows");
        if (vectors_.cols() <= 0) throw DimensionMismatchError("embedding dimension must be positive");
        for (std::size_t i = 0; i < words.size(); ++i) index_.emplace(std::move(words[i]), static_cast<Eigen::Index>(i));
    }

    Eigen::Index dimension() const noexcept { return vectors_.cols(); }
    std::size_t size() const noexcept { return index_.size(); }

    std::optional<Eigen::Index> row_of(std::string_view word) const {
        const auto it = index_.find(std::string(word));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    auto vector(Eigen::Index row) const { return vectors_.row(row); }
    const Matrix& matrix() const noexcept { return vectors_; }

    // "token v1 ... vd" per line, with an optional leading "count dim" header.
    static BasicEmbeddingTable parse(std::istream& in) {
        std::vector<std::string> words;
        std::vector<Scalar> values;
        Eigen::Index dim = -1;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            std::istringstream fields(line);
            std::string word;
            fields >> word;
            std::vector<Scalar> row;
            for (double v; fields >> v;) row.push_back(static_cast<Scalar>(v));
            if (!fields.eof()) throw ParseError("embedding line " + std::to_string(lineno) + ": non-numeric component");
            if (lineno == 1 && row.size() == 1 && is_integer(word) && static_cast<double>(row[0]) == std::floor(static_cast<double>(row[0])))
                continue;  // "count dim" header
            if (dim < 0) dim = static_cast<Eigen::Index>(row.size());
            if (static_cast<Eigen::Index>(row.size()) != dim || dim == 0)
                throw DimensionMismatchError("embedding line " + std::to_string(lineno) + " has " +
                                             std::to_string(row.size()) + " components, expected " + std::to_string(dim));
            words.push_back(std::move(word));
            values.insert(values.end(), row.begin(), row.end());
        }
        if (words.empty()) throw ParseError("embedding file has no vectors");
        Matrix m = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(words.size()), dim);
        return BasicEmbeddingTable(std::move(words), std::move(m));
    }

    static BasicEmbeddingTable load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open embedding file " + path.string());
        return parse(in);
    }

private:
    static bool is_integer(const std::string& s) {
        return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
    }

    std::unordered_map<std::string, Eigen::Index> index_;
    Matrix vectors_;
};

using EmbeddingTable = BasicEmbeddingTable<float>;

// Unweighted mean of in-vocabulary token vectors, accumulated in double.
// nullopt when no token is in vocabulary.
template <typename Scalar>
std::optional<Eigen::VectorXd> document_vector(const std::vector<std::string>& tokens,
                                               const BasicEmbeddingTable<Scalar>& table) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension());
    std::size_t hits = 0;
    for (const auto& t : tokens) {
        if (const auto row = table.row_of(t)) {
            sum += table.vector(*row).transpose().template cast<double>();
            ++hits;
        }
    }
    if (hits == 0) return std::nullopt;
    return Eigen::VectorXd(sum / static_cast<double>(hits));
}

template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    const double denom = a.norm() * b.norm();
    if (denom == 0.0) return 0.0;
    return std::clamp(a.dot(b) / denom, -1.0, 1.0);
}

} // namespace calmdesk::lingua
