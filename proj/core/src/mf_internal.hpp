#pragma once

#include <vector>

#include "metalearn/dataset.hpp"
#include "metalearn/matrix.hpp"
#include "metalearn/metafeatures.hpp"

namespace metalearn::detail {

// Rows sorted lexicographically by feature values (missing last) and then
// label; extractors run on this order so results do not depend on the input
// row order.
Dataset canonical_order(const Dataset& ds);

// Vector holding every name of `family`, all missing.
MetaFeatureVector empty_family(MetaFamily family);

// Design matrix (numeric value, binary code, categorical one-hot) with
// missing cells replaced by the column mean. `owner`, when given, receives
// the source attribute of each column.
Matrix design_matrix(const Dataset& ds, std::vector<std::size_t>* owner = nullptr);

}  // namespace metalearn::detail
