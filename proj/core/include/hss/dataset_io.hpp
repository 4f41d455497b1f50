#pragma once

#include <string>

#include "hss/corpus.hpp"

namespace hss {

inline constexpr uint32_t kDatasetFormatVersion = 1;

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace hss
