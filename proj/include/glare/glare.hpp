#pragma once

// Umbrella header.

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/data/markup.hpp"
#include "glare/data/synth.hpp"
#include "glare/data/train.hpp"
#include "glare/eval/bench.hpp"
#include "glare/eval/metrics.hpp"
#include "glare/features/features.hpp"
#include "glare/model/glare_net.hpp"
#include "glare/model/naive_bayes.hpp"
#include "glare/model/unet.hpp"
#include "glare/nn/adam.hpp"
#include "glare/nn/graph.hpp"
#include "glare/nn/loss.hpp"
#include "glare/nn/ops.hpp"
#include "glare/nn/tensor.hpp"
#include "glare/raster/image.hpp"
#include "glare/raster/image_io.hpp"
