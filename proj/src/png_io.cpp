#include "objmark/png_io.hpp"

#include <png.h>

#include <cstring>
#include <vector>

#include "objmark/error.hpp"

namespace objmark {

namespace {

struct PngImage {
    png_image image;

    PngImage() {
        std::memset(&image, 0, sizeof(image));
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image); }

    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, png_uint_32 format,
                                   int& width, int& height) {
    PngImage png;
    if (png_image_begin_read_from_file(&png.image, path.c_str()) == 0) {
        fail(Errc::io, "cannot read PNG '" + path.string() + "': " + png.image.message);
    }
    png.image.format = format;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
    png_color black{0, 0, 0};
    if (png_image_finish_read(&png.image, &black, buffer.data(), 0, nullptr) == 0) {
        fail(Errc::io, "cannot decode PNG '" + path.string() + "': " + png.image.message);
    }
    width = static_cast<int>(png.image.width);
    height = static_cast<int>(png.image.height);
    return buffer;
}

void write_png(const std::filesystem::path& path, png_uint_32 format, int width, int height,
               const std::vector<std::uint8_t>& buffer) {
    PngImage png;
    png.image.width = static_cast<png_uint_32>(width);
    png.image.height = static_cast<png_uint_32>(height);
    png.image.format = format;
    if (png_image_write_to_file(&png.image, path.c_str(), 0, buffer.data(), 0, nullptr) == 0) {
        fail(Errc::io, "cannot write PNG '" + path.string() + "': " + png.image.message);
    }
}

}  // namespace

Image read_png_image(const std::filesystem::path& path) {
    int width = 0;
    int height = 0;
    const auto rgb = read_png(path, PNG_FORMAT_RGB, width, height);
    return from_rgb8(width, height, rgb);
}

BinaryMask read_png_mask(const std::filesystem::path& path) {
    int width = 0;
    int height = 0;
    const auto gray = read_png(path, PNG_FORMAT_GRAY, width, height);
    BinaryMask mask(width, height);
    auto dst = mask.data();
    for (std::size_t i = 0; i < gray.size(); ++i) {
        dst[i] = gray[i] >= 128 ? 1 : 0;
    }
    return mask;
}

void write_png_image(const std::filesystem::path& path, const Image& image) {
    write_png(path, PNG_FORMAT_RGB, image.width(), image.height(), to_rgb8(image));
}

void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.pixel_count());
    const auto src = mask.data();
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = src[i] ? 255 : 0;
    }
    write_png(path, PNG_FORMAT_GRAY, mask.width(), mask.height(), gray);
}

}  // namespace objmark
