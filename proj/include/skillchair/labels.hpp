#pragma once

#include <span>

namespace skillchair {

/// Throws NonBinaryLabels for any label outside {0, 1}, and
/// SingleClassTraining when `require_both` is set and one class is absent.
void require_binary_labels(std::span<const int> labels, bool require_both = true);

}  // namespace skillchair
