#pragma once

// The U-Net-like comparison network: 18 layers, five 2x2 poolings and two
// nearest-neighbor upsamplings with skip concatenations, consuming the
// normalized gray image and emitting a 1-channel map at 1/8 resolution
// (one value per 8x8 pixel group).

#include <cstring>
#include <vector>

#include "glare/block_grid.hpp"
#include "glare/core.hpp"
#include "glare/nn/graph.hpp"
#include "glare/nn/loss.hpp"
#include "glare/raster/image.hpp"

namespace glare {

inline ModelGraph build_unet(Rng& rng) {
    ModelGraph g;
    const int l0 = g.add_input("gray", 1);
    const int l1 = g.add_instance_norm("norm1", l0);
    const int l2 = g.add_conv("conv2", l1, 3, 32, Activation::Relu);
    const int l3 = g.add_maxpool2("pool3", l2);
    const int l4 = g.add_conv("conv4", l3, 3, 32, Activation::Relu);
    const int l5 = g.add_maxpool2("pool5", l4);
    const int l6 = g.add_conv("conv6", l5, 3, 64, Activation::Relu);
    const int l7 = g.add_maxpool2("pool7", l6);
    const int l8 = g.add_conv("conv8", l7, 3, 64, Activation::Relu);
    const int l9 = g.add_maxpool2("pool9", l8);
    const int l10 = g.add_conv("conv10", l9, 3, 64, Activation::Relu);
    const int l11 = g.add_maxpool2("pool11", l10);
    const int l12 = g.add_conv("conv12", l11, 3, 64, Activation::Relu);
    const int l13 = g.add_conv("conv13", l12, 3, 128, Activation::Relu);
    const int l14 = g.add_upsample2("up14", l13);
    const int l15 = g.add_conv("conv15", g.add_concat("skip15", {l14, l9}), 3, 128,
                               Activation::Relu);
    const int l16 = g.add_upsample2("up16", l15);
    const int l17 = g.add_conv("conv17", g.add_concat("skip17", {l16, l7}), 3, 128,
                               Activation::Relu);
    const int l18 = g.add_conv("conv18", l17, 3, 1, Activation::Sigmoid);
    g.set_output(l18);

    for (int i = 0; i < g.layer_count(); ++i)
        if (g.layer(i).kind == LayerKind::Conv) he_init(g.layer(i).conv, rng);
    return g;
}

// Largest top-left window whose dims are multiples of 32 (five poolings
// followed by two upsamplings need that to keep shapes aligned).
inline GrayImage crop_to_multiple32(const GrayImage& img) {
    const int w = (img.width / 32) * 32;
    const int h = (img.height / 32) * 32;
    if (w < 32 || h < 32)
        throw DimensionError("unet: image smaller than 32x32");
    if (w == img.width && h == img.height) return img;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        std::memcpy(out.row(y), img.row(y), static_cast<size_t>(w));
    return out;
}

inline Tensor3 gray_to_tensor(const GrayImage& img) {
    Tensor3 t(img.height, img.width, 1);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        t.values[i] = static_cast<float>(img.pixels[i]);
    return t;
}

// Probability per 8x8 pixel group.
inline BlockGrid unet_forward(const ModelGraph& model, const GrayImage& img,
                              int workers = 1) {
    const GrayImage cropped = crop_to_multiple32(img);
    const Tensor3 input = gray_to_tensor(cropped);
    const Tensor3 out = model.forward({&input}, workers);
    return grid_from_tensor(out, 8);
}

}  // namespace glare
