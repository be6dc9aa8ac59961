#pragma once

// Model-free image-quality scores used in place of the training loss when
// reweighting examples.

#include <string_view>
#include <vector>

#include "egrw/dataset.hpp"
#include "egrw/image.hpp"

namespace egrw {

enum class QualityScorer { laplacian_variance };

QualityScorer parse_scorer(std::string_view name);

/// Population variance of the 5-point Laplacian response
/// [[0,1,0],[1,-4,1],[0,1,0]] under replicate padding. Low values mean few
/// sharp edges.
double laplacian_variance(const Image& image);

/// -laplacian_variance: blurrier images get the larger pseudo-loss.
double blur_pseudo_loss(const Image& image);

double score(QualityScorer scorer, const Image& image);

/// Scores every example once and caches the result on the dataset. With
/// `standardize`, the column is shifted and scaled to zero mean and unit
/// variance over the dataset (a constant column is only centered).
const std::vector<double>& pseudo_loss_column(LabeledDataset& ds, QualityScorer scorer,
                                              bool standardize);

}  // namespace egrw
