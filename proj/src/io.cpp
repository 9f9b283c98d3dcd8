#include "tbsd/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace tbsd::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 gray, 3 rgb (alpha stripped)
  int depth = 8;
  std::vector<unsigned char> bytes;
};

Raster decode_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError("not a PNG file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: out of memory");
  }
  Raster raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  raster.channels = png_get_channels(png, info);
  raster.depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raster.bytes.resize(stride * raster.height);
  rows.resize(raster.height);
  for (int r = 0; r < raster.height; ++r) rows[r] = raster.bytes.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raster;
}

void encode_gray8(const fs::path& path, const std::vector<unsigned char>& pixels, int width,
                  int height) {
  const fs::path tmp = path.string() + ".tmp";
  {
    FilePtr file(std::fopen(tmp.c_str(), "wb"));
    if (!file) throw IoError("cannot write " + tmp.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw IoError("libpng: out of memory");
    }
    std::vector<png_const_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw IoError("failed writing PNG: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < height; ++r) rows[r] = pixels.data() + static_cast<std::size_t>(r) * width;
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

Matrix read_image(const fs::path& path) {
  const Raster raster = decode_png(path);
  const double scale = raster.depth == 16 ? 65535.0 : 255.0;
  Matrix out(raster.height, raster.width);
  const std::size_t bytes_per = raster.depth == 16 ? 2 : 1;
  const std::size_t stride = static_cast<std::size_t>(raster.width) * raster.channels * bytes_per;
  for (int r = 0; r < raster.height; ++r) {
    const unsigned char* row = raster.bytes.data() + stride * r;
    for (int c = 0; c < raster.width; ++c) {
      double ch[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < raster.channels && k < 3; ++k) {
        const std::size_t at = (static_cast<std::size_t>(c) * raster.channels + k) * bytes_per;
        // 16-bit samples were swapped to little-endian on read.
        ch[k] = bytes_per == 2 ? static_cast<double>(row[at] | (row[at + 1] << 8))
                               : static_cast<double>(row[at]);
      }
      const double v = raster.channels >= 3 ? 0.299 * ch[0] + 0.587 * ch[1] + 0.114 * ch[2] : ch[0];
      out(r, c) = v / scale;
    }
  }
  return out;
}

void write_image(const fs::path& path, const Matrix& image) {
  require(image.size() > 0, "write_image: empty image");
  std::vector<unsigned char> px(static_cast<std::size_t>(image.size()));
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = std::isfinite(image(r, c)) ? std::clamp(image(r, c), 0.0, 1.0) : 0.0;
      px[static_cast<std::size_t>(r * image.cols() + c)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
  encode_gray8(path, px, static_cast<int>(image.cols()), static_cast<int>(image.rows()));
}

Mask read_mask(const fs::path& path) {
  const Matrix m = read_image(path);
  return m.array() > 0.0;
}

void write_mask(const fs::path& path, const Mask& mask) {
  require(mask.size() > 0, "write_mask: empty mask");
  std::vector<unsigned char> px(static_cast<std::size_t>(mask.size()));
  for (Eigen::Index r = 0; r < mask.rows(); ++r)
    for (Eigen::Index c = 0; c < mask.cols(); ++c)
      px[static_cast<std::size_t>(r * mask.cols() + c)] = mask(r, c) ? 255 : 0;
  encode_gray8(path, px, static_cast<int>(mask.cols()), static_cast<int>(mask.rows()));
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string basis_to_json(const TextureBasis& basis) {
  require(basis.atoms.rows() == basis.patch_size(), "basis: atom length does not match patch");
  json j;
  j["version"] = kBasisFormatVersion;
  j["patch_shape"] = {basis.patch_rows, basis.patch_cols};
  j["directions_deg"] = basis.directions_deg;
  json atoms = json::array();
  for (Eigen::Index k = 0; k < basis.atoms.cols(); ++k) {
    std::vector<double> a(basis.atoms.col(k).data(), basis.atoms.col(k).data() + basis.atoms.rows());
    atoms.push_back(std::move(a));
  }
  j["atoms"] = std::move(atoms);
  j["source"] = basis.source;
  return j.dump(1) + "\n";
}

TextureBasis basis_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("basis file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kBasisFormatVersion)
      throw IoError("unsupported basis file version");
    TextureBasis b;
    const auto shape = j.at("patch_shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] <= 0 || shape[1] <= 0)
      throw IoError("basis file: bad patch_shape");
    b.patch_rows = shape[0];
    b.patch_cols = shape[1];
    b.directions_deg = j.at("directions_deg").get<std::vector<double>>();
    b.source = j.value("source", std::string{});
    const auto& atoms = j.at("atoms");
    b.atoms.resize(b.patch_size(), static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const auto a = atoms[k].get<std::vector<double>>();
      if (static_cast<int>(a.size()) != b.patch_size())
        throw IoError("basis file: atom length does not match patch_shape");
      for (std::size_t i = 0; i < a.size(); ++i) b.atoms(static_cast<Eigen::Index>(i), k) = a[i];
    }
    return b;
  } catch (const json::exception& e) {
    throw IoError(std::string("basis file: ") + e.what());
  }
}

void save_basis(const fs::path& path, const TextureBasis& basis) {
  write_text_atomic(path, basis_to_json(basis));
}

TextureBasis load_basis(const fs::path& path) { return basis_from_json(read_text(path)); }

}  // namespace tbsd::io
