#include "vcprobe/dataset.hpp"

#include <string>

#include "vcprobe/error.hpp"

namespace vcprobe {

Dataset::Dataset(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw DomainError("dataset dimension must be positive");
}

Dataset Dataset::from_samples(std::size_t dimension, std::span<const LabeledSample> samples) {
    Dataset data(dimension);
    data.reserve(samples.size());
    for (const auto& s : samples) data.add(s);
    return data;
}

void Dataset::reserve(std::size_t rows) {
    features_.reserve(rows * dimension_);
    labels_.reserve(rows);
}

void Dataset::add(std::span<const double> features, std::uint8_t label) {
    if (features.size() != dimension_)
        throw DomainError("sample has " + std::to_string(features.size()) +
                          " features, dataset dimension is " + std::to_string(dimension_));
    if (label > 1) throw DomainError("labels must be 0 or 1");
    features_.insert(features_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

void Dataset::set_label(std::size_t row, std::uint8_t label) {
    if (label > 1) throw DomainError("labels must be 0 or 1");
    labels_.at(row) = label;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw DomainError("dataset slice out of range");
    Dataset out(dimension_);
    out.features_.assign(features_.begin() + static_cast<std::ptrdiff_t>(begin * dimension_),
                         features_.begin() + static_cast<std::ptrdiff_t>(end * dimension_));
    out.labels_.assign(labels_.begin() + static_cast<std::ptrdiff_t>(begin),
                       labels_.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

}  // namespace vcprobe
