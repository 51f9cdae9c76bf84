#pragma once

// File I/O for PNG and binary PGM/PPM. PNG goes through libpng's simplified
// API; color inputs are reduced with our own BT.601 conversion so the
// pipeline sees one grayscale convention regardless of container.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "glare/raster/image.hpp"

namespace glare {

namespace detail {

inline void skip_pnm_space(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_pnm_int(std::istream& in) {
    skip_pnm_space(in);
    int v = -1;
    in >> v;
    if (!in || v < 0) throw FormatError("PNM: bad header field");
    return v;
}

}  // namespace detail

inline bool has_png_signature(const unsigned char* bytes, size_t n) {
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    return n >= 8 && std::memcmp(bytes, sig, 8) == 0;
}

inline RgbImage read_rgb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open image: " + path);
    unsigned char head[8] = {};
    in.read(reinterpret_cast<char*>(head), 8);
    size_t got = static_cast<size_t>(in.gcount());
    in.clear();
    in.seekg(0);

    if (has_png_signature(head, got)) {
        in.close();
        png_image image;
        std::memset(&image, 0, sizeof(image));
        image.version = PNG_IMAGE_VERSION;
        if (!png_image_begin_read_from_file(&image, path.c_str()))
            throw FormatError("PNG read failed: " + path);
        image.format = PNG_FORMAT_RGB;
        RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
        if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
            png_image_free(&image);
            throw FormatError("PNG decode failed: " + path);
        }
        return out;
    }

    if (got >= 2 && head[0] == 'P' && (head[1] == '5' || head[1] == '6')) {
        const bool color = head[1] == '6';
        in.ignore(2);
        int w = detail::read_pnm_int(in);
        int h = detail::read_pnm_int(in);
        int maxval = detail::read_pnm_int(in);
        if (w <= 0 || h <= 0 || maxval != 255)
            throw FormatError("PNM: unsupported header in " + path);
        in.get();  // single whitespace before raster
        RgbImage out(w, h);
        if (color) {
            in.read(reinterpret_cast<char*>(out.pixels.data()),
                    static_cast<std::streamsize>(out.pixels.size()));
            if (in.gcount() != static_cast<std::streamsize>(out.pixels.size()))
                throw FormatError("PNM: truncated raster in " + path);
        } else {
            std::vector<std::uint8_t> gray(static_cast<size_t>(w) * h);
            in.read(reinterpret_cast<char*>(gray.data()),
                    static_cast<std::streamsize>(gray.size()));
            if (in.gcount() != static_cast<std::streamsize>(gray.size()))
                throw FormatError("PNM: truncated raster in " + path);
            for (size_t i = 0; i < gray.size(); ++i) {
                out.pixels[i * 3] = gray[i];
                out.pixels[i * 3 + 1] = gray[i];
                out.pixels[i * 3 + 2] = gray[i];
            }
        }
        return out;
    }
    throw FormatError("unrecognized image format: " + path);
}

inline GrayImage read_gray(const std::string& path) {
    // PGM carries luma directly; everything else goes through BT.601.
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open image: " + path);
    char head[2] = {};
    in.read(head, 2);
    if (in.gcount() == 2 && head[0] == 'P' && head[1] == '5') {
        int w = detail::read_pnm_int(in);
        int h = detail::read_pnm_int(in);
        int maxval = detail::read_pnm_int(in);
        if (w <= 0 || h <= 0 || maxval != 255)
            throw FormatError("PGM: unsupported header in " + path);
        in.get();
        GrayImage out(w, h);
        in.read(reinterpret_cast<char*>(out.pixels.data()),
                static_cast<std::streamsize>(out.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(out.pixels.size()))
            throw FormatError("PGM: truncated raster in " + path);
        return out;
    }
    in.close();
    return to_grayscale(read_rgb(path));
}

// Writers go through a temp file plus rename so partial output never lands
// under the final name.
namespace detail {

inline void commit_file(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw FormatError("cannot move output into place: " + path);
    }
}

inline void write_bytes(const std::string& path, const std::string& header,
                        const std::uint8_t* data, size_t n) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write: " + tmp);
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out) throw FormatError("short write: " + tmp);
    }
    commit_file(tmp, path);
}

}  // namespace detail

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::string header = "P5\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    detail::write_bytes(path, header, img.pixels.data(), img.pixels.size());
}

inline void write_ppm(const std::string& path, const RgbImage& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    detail::write_bytes(path, header, img.pixels.data(), img.pixels.size());
}

inline void write_png(const std::string& path, const RgbImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;
    const std::string tmp = path + ".tmp";
    if (!png_image_write_to_file(&image, tmp.c_str(), 0, img.pixels.data(), 0, nullptr))
        throw FormatError("PNG write failed: " + path);
    detail::commit_file(tmp, path);
}

inline void write_png(const std::string& path, const GrayImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    const std::string tmp = path + ".tmp";
    if (!png_image_write_to_file(&image, tmp.c_str(), 0, img.pixels.data(), 0, nullptr))
        throw FormatError("PNG write failed: " + path);
    detail::commit_file(tmp, path);
}

// Dispatch on extension; anything not .png is written as PNM.
inline void write_image(const std::string& path, const GrayImage& img) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png")
        write_png(path, img);
    else
        write_pgm(path, img);
}

inline void write_image(const std::string& path, const RgbImage& img) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png")
        write_png(path, img);
    else
        write_ppm(path, img);
}

}  // namespace glare
