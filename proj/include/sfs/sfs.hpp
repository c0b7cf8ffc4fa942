#pragma once

// Umbrella header for the SFS library.

#include "sfs/autodiff.hpp"
#include "sfs/common.hpp"
#include "sfs/dataset.hpp"
#include "sfs/eval.hpp"
#include "sfs/gain.hpp"
#include "sfs/model.hpp"
#include "sfs/ranking.hpp"
#include "sfs/saliency.hpp"
#include "sfs/serialize.hpp"
#include "sfs/tensor.hpp"
