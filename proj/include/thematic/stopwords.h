#pragma once

#include <string>
#include <vector>

namespace thematic {

const std::vector<std::string>& english_stopwords();

}  // namespace thematic
