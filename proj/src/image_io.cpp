#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "xgan/domains.hpp"
#include "xgan/errors.hpp"

namespace xgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", i);
  return buf;
}

}  // namespace

void write_png(const std::string& path, const std::vector<std::uint8_t>& rgb, int width, int height) {
  if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(3) * width * height)
    throw DimensionError("write_png: buffer does not match " + std::to_string(width) + "x" + std::to_string(height));
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed writing '" + path + "'");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(3) * width * y));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> read_png(const std::string& path, int& width, int& height) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("cannot open '" + path + "'");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8)) throw DataError("not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng init failed");
  }
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG data");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info), depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  out.resize(static_cast<std::size_t>(3) * w * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.data() + static_cast<std::size_t>(3) * w * y;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

std::vector<std::uint8_t> to_rgb8(const ImageBatch<float>& images, int i) {
  const int C = images.c, H = images.h, W = images.w;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(3) * H * W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int k = 0; k < 3; ++k) {
        const float v = images.at(i, std::min(k, C - 1), y, x);
        const float u = std::clamp((v + 1.0f) * 127.5f, 0.0f, 255.0f);
        out[(static_cast<std::size_t>(y) * W + x) * 3 + k] = static_cast<std::uint8_t>(std::lround(u));
      }
  return out;
}

ImageBatch<float> from_rgb8(const std::vector<std::uint8_t>& rgb, int width, int height, int size) {
  if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(3) * width * height)
    throw DimensionError("from_rgb8: buffer does not match dimensions");
  ImageBatch<float> out(1, 3, size, size);
  // Area average: each output pixel integrates the source over its footprint.
  const double sx = static_cast<double>(width) / size, sy = static_cast<double>(height) / size;
  for (int oy = 0; oy < size; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    for (int ox = 0; ox < size; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      double acc[3] = {0, 0, 0}, area = 0;
      for (int y = static_cast<int>(std::floor(y0)); y < std::min(height, static_cast<int>(std::ceil(y1))); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        for (int x = static_cast<int>(std::floor(x0)); x < std::min(width, static_cast<int>(std::ceil(x1))); ++x) {
          const double wgt = wy * (std::min<double>(x + 1, x1) - std::max<double>(x, x0));
          if (wgt <= 0) continue;
          for (int k = 0; k < 3; ++k) acc[k] += wgt * rgb[(static_cast<std::size_t>(y) * width + x) * 3 + k];
          area += wgt;
        }
      }
      for (int k = 0; k < 3; ++k) out.at(0, k, oy, ox) = static_cast<float>(acc[k] / area / 127.5 - 1.0);
    }
  }
  return out;
}

void export_corpus(const Corpus& corpus, const AttributeSchema& schema, const std::string& dir) {
  fs::create_directories(dir);
  const std::size_t n = corpus.labels.size();
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < sn; ++i)
    write_png((fs::path(dir) / sample_name(static_cast<std::size_t>(i))).string(),
              to_rgb8(corpus.images, static_cast<int>(i)), corpus.images.w, corpus.images.h);
  std::ofstream attrs(fs::path(dir) / "attributes.jsonl");
  for (std::size_t i = 0; i < n; ++i) {
    json named = json::object();
    for (std::size_t a = 0; a < schema.attributes.size(); ++a)
      named[schema.attributes[a].name] = schema.attributes[a].options.at(static_cast<std::size_t>(corpus.labels[i][a]));
    attrs << json{{"file", sample_name(i)}, {"attributes", named}, {"values", corpus.labels[i]}}.dump() << '\n';
  }
  const Split split = split_train_test(n);
  std::ofstream train(fs::path(dir) / "train.txt"), test(fs::path(dir) / "test.txt");
  for (auto i : split.train) train << sample_name(i) << '\n';
  for (auto i : split.test) test << sample_name(i) << '\n';
  std::ofstream(fs::path(dir) / "schema.json") << to_json(schema).dump(2) << '\n';
  if (!attrs || !train || !test) throw DataError("failed writing corpus files under '" + dir + "'");
}

Corpus load_corpus(const std::string& dir, const std::string& manifest, int image_size) {
  const fs::path root(dir);
  if (!fs::exists(root / "attributes.jsonl")) throw DataError("'" + dir + "' has no attributes.jsonl");
  std::map<std::string, AttributeVector> labels;
  std::vector<std::string> order;
  {
    std::ifstream in(root / "attributes.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        const auto file = j.at("file").get<std::string>();
        labels[file] = j.at("values").get<AttributeVector>();
        order.push_back(file);
      } catch (const json::exception& e) {
        throw DataError("malformed attributes.jsonl line: " + std::string(e.what()));
      }
    }
  }
  std::vector<std::string> files;
  if (manifest == "all") {
    files = order;
  } else if (manifest == "train" || manifest == "test") {
    std::ifstream in(root / (manifest + ".txt"));
    if (!in) throw DataError("'" + dir + "' has no " + manifest + ".txt");
    for (std::string f; std::getline(in, f);)
      if (!f.empty()) files.push_back(f);
  } else {
    throw ConfigError("manifest must be train, test or all, got '" + manifest + "'");
  }
  if (files.empty()) throw DataError("corpus manifest '" + manifest + "' in '" + dir + "' is empty");
  Corpus c;
  c.images = ImageBatch<float>(static_cast<int>(files.size()), 3, image_size, image_size);
  c.labels.resize(files.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(files.size());
  std::vector<std::string> errors(files.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& f = files[static_cast<std::size_t>(i)];
    try {
      auto it = labels.find(f);
      if (it == labels.end()) throw DataError("no attributes recorded");
      int w = 0, h = 0;
      const auto rgb = read_png((root / f).string(), w, h);
      const auto img = from_rgb8(rgb, w, h, image_size);
      std::copy(img.data.begin(), img.data.end(), c.images.data.begin() + i * img.sample_size());
      c.labels[static_cast<std::size_t>(i)] = it->second;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = f + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DataError("corpus '" + dir + "': " + e);
  return c;
}

LoadedImages load_image_dir(const std::string& dir, int image_size) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir + "' is not a directory");
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  LoadedImages out;
  std::vector<ImageBatch<float>> imgs;
  for (const auto& p : paths) {
    try {
      int w = 0, h = 0;
      const auto rgb = read_png(p.string(), w, h);
      imgs.push_back(from_rgb8(rgb, w, h, image_size));
      out.files.push_back(p.filename().string());
    } catch (const std::exception& e) {
      out.errors.push_back(p.filename().string() + ": " + e.what());
    }
  }
  if (imgs.empty())
    throw DataError("no loadable PNG images in '" + dir + "'" +
                    (out.errors.empty() ? std::string() : " (" + out.errors.front() + ")"));
  out.images = concat_batch(imgs);
  return out;
}

}  // namespace xgan
