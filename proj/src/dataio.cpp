#include "pccseg/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "pccseg/error.hpp"

namespace pccseg {

namespace {

cv::Mat read_raster(const std::filesystem::path& path, int flags) {
  if (!std::filesystem::exists(path)) throw InvalidInput("file not found: " + path.string());
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw FormatError("cannot decode raster: " + path.string());
  return m;
}

cv::Mat to_8u(const cv::Mat& m) {
  if (m.depth() == CV_8U) return m;
  cv::Mat out;
  m.convertTo(out, CV_8U, m.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
  return out;
}

RgbImage from_mat(const cv::Mat& input) {
  cv::Mat m = to_8u(input);
  cv::Mat bgr;
  switch (m.channels()) {
    case 1: cv::cvtColor(m, bgr, cv::COLOR_GRAY2BGR); break;
    case 3: bgr = m; break;
    case 4: cv::cvtColor(m, bgr, cv::COLOR_BGRA2BGR); break;
    default: throw FormatError("unsupported channel count: " + std::to_string(m.channels()));
  }
  RgbImage img(bgr.cols, bgr.rows);
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) img.at(r, c) = {row[c][2], row[c][1], row[c][0]};
  }
  return img;
}

cv::Mat to_mat(const RgbImage& img) {
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int r = 0; r < img.height; ++r) {
    auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < img.width; ++c) {
      const Rgb px = img.at(r, c);
      row[c] = cv::Vec3b(px.b, px.g, px.r);
    }
  }
  return bgr;
}

GrayRaster gray_from_mat(const cv::Mat& input) {
  cv::Mat m = to_8u(input);
  GrayRaster out(m.cols, m.rows);
  const int ch = m.channels();
  if (ch != 1 && ch != 3 && ch != 4) throw FormatError("unsupported channel count: " + std::to_string(ch));
  bool equal_channels = true;
  for (int r = 0; r < m.rows && equal_channels && ch > 1; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c) {
      if (row[c * ch] != row[c * ch + 1] || row[c * ch] != row[c * ch + 2]) {
        equal_channels = false;
        break;
      }
    }
  }
  if (ch > 1 && !equal_channels) {
    cv::Mat g;
    cv::cvtColor(m, g, ch == 3 ? cv::COLOR_BGR2GRAY : cv::COLOR_BGRA2GRAY);
    m = g;
  }
  const int stride = equal_channels ? ch : 1;
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c) out.at(r, c) = row[c * stride];
  }
  return out;
}

cv::Mat gray_to_mat(const GrayRaster& g) {
  cv::Mat m(g.height, g.width, CV_8UC1);
  for (int r = 0; r < g.height; ++r) std::copy_n(g.pixels.data() + static_cast<std::size_t>(r) * g.width, g.width, m.ptr<std::uint8_t>(r));
  return m;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    throw InvalidInput("cannot write raster " + path.string() + ": " + e.what());
  }
  if (!ok) throw InvalidInput("cannot write raster: " + path.string());
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  return from_mat(read_raster(path, cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH));
}

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw FormatError("empty image upload");
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat m;
  try {
    m = cv::imdecode(buf, cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
  } catch (const cv::Exception&) {
  }
  if (m.empty()) throw FormatError("cannot decode image upload");
  return from_mat(m);
}

void save_image(const std::filesystem::path& path, const RgbImage& image) {
  image.validate();
  write_mat(path, to_mat(image));
}

GrayRaster load_gray(const std::filesystem::path& path) {
  return gray_from_mat(read_raster(path, cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH));
}

void save_gray(const std::filesystem::path& path, const GrayRaster& raster) { write_mat(path, gray_to_mat(raster)); }

std::vector<std::uint8_t> encode_png(const GrayRaster& raster) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", gray_to_mat(raster), out)) throw InvalidInput("PNG encoding failed");
  return out;
}

LabelMap trimap_from_raster(const GrayRaster& raster) {
  LabelMap map(raster.width, raster.height);
  for (int r = 0; r < raster.height; ++r) {
    for (int c = 0; c < raster.width; ++c) {
      const std::uint8_t v = raster.at(r, c);
      switch (v) {
        case 0: map.at(r, c) = PixelLabel::kIgnoredBackground; break;
        case 64: map.at(r, c) = PixelLabel::kLabeledBackground; break;
        case 128: map.at(r, c) = PixelLabel::kUnlabeled; break;
        case 255: map.at(r, c) = PixelLabel::kLabeledForeground; break;
        default:
          throw FormatError("unexpected trimap value " + std::to_string(v) + " at row " + std::to_string(r) +
                            ", column " + std::to_string(c));
      }
    }
  }
  return map;
}

LabelMap load_trimap(const std::filesystem::path& path) { return trimap_from_raster(load_gray(path)); }

GroundTruth truth_from_raster(const GrayRaster& raster) {
  GroundTruth gt{raster.width, raster.height, std::vector<TruthLabel>(raster.size())};
  for (std::size_t p = 0; p < raster.size(); ++p) {
    const std::uint8_t v = raster.pixels[p];
    gt.codes[p] = v == 0 ? TruthLabel::kBackground : v == 255 ? TruthLabel::kForeground : TruthLabel::kUncertain;
  }
  return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) { return truth_from_raster(load_gray(path)); }

GrayRaster mask_from_classes(const ClassMap& classes) {
  GrayRaster m(classes.width, classes.height);
  for (std::size_t p = 0; p < classes.size(); ++p) m.pixels[p] = classes.classes[p] == kForeground ? 255 : 0;
  return m;
}

void save_mask(const std::filesystem::path& path, const ClassMap& classes) {
  save_gray(path, mask_from_classes(classes));
}

ClassMap load_mask(const std::filesystem::path& path) {
  const GrayRaster g = load_gray(path);
  ClassMap out{g.width, g.height, std::vector<std::uint8_t>(g.size())};
  for (std::size_t p = 0; p < g.size(); ++p) out.classes[p] = g.pixels[p] >= 128 ? kForeground : kBackground;
  return out;
}

EvalReport error_rate(const ClassMap& result, const LabelMap& trimap, const GroundTruth& truth) {
  if (result.width != trimap.width || result.height != trimap.height || result.size() != trimap.size() ||
      truth.width != trimap.width || truth.height != trimap.height || truth.size() != trimap.size()) {
    throw InvalidInput("result, trimap and ground truth geometries differ");
  }
  EvalReport rep;
  for (std::size_t p = 0; p < trimap.size(); ++p) {
    if (trimap.codes[p] != PixelLabel::kUnlabeled || truth.codes[p] == TruthLabel::kUncertain) continue;
    const int t = truth.codes[p] == TruthLabel::kForeground ? kForeground : kBackground;
    const int pred = result.classes[p] == kForeground ? kForeground : kBackground;
    ++rep.evaluated;
    ++rep.confusion[t][pred];
    if (t != pred) ++rep.wrong;
  }
  rep.error_rate = rep.evaluated ? static_cast<double>(rep.wrong) / static_cast<double>(rep.evaluated) : 0.0;
  return rep;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["error_rate"] = error_rate;
  j["evaluated_pixels"] = evaluated;
  j["wrong_pixels"] = wrong;
  j["confusion"] = {{"background_as_background", confusion[0][0]},
                    {"background_as_foreground", confusion[0][1]},
                    {"foreground_as_background", confusion[1][0]},
                    {"foreground_as_foreground", confusion[1][1]}};
  return j;
}

std::string EvalReport::to_text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "error_rate          %.6f\n"
                "evaluated_pixels    %zu\n"
                "wrong_pixels        %zu\n"
                "bg_as_bg            %zu\n"
                "bg_as_fg            %zu\n"
                "fg_as_bg            %zu\n"
                "fg_as_fg            %zu\n",
                error_rate, evaluated, wrong, confusion[0][0], confusion[0][1], confusion[1][0], confusion[1][1]);
  return buf;
}

double factor_for_max_side(int width, int height, int max_side) {
  const int longest = std::max(width, height);
  if (max_side <= 0 || longest <= max_side) return 1.0;
  return static_cast<double>(max_side) / static_cast<double>(longest);
}

namespace {

cv::Size scaled_size(int w, int h, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw InvalidParameter("downscale factor must lie in (0, 1]");
  return {std::max(1, static_cast<int>(std::lround(w * factor))), std::max(1, static_cast<int>(std::lround(h * factor)))};
}

}  // namespace

RgbImage downscale_image(const RgbImage& image, double factor) {
  const cv::Size size = scaled_size(image.width, image.height, factor);
  if (size.width == image.width && size.height == image.height) return image;
  cv::Mat out;
  cv::resize(to_mat(image), out, size, 0, 0, cv::INTER_AREA);
  return from_mat(out);
}

GrayRaster downscale_gray(const GrayRaster& raster, double factor) {
  const cv::Size size = scaled_size(raster.width, raster.height, factor);
  if (size.width == raster.width && size.height == raster.height) return raster;
  cv::Mat out;
  cv::resize(gray_to_mat(raster), out, size, 0, 0, cv::INTER_NEAREST);
  return gray_from_mat(out);
}

DatasetEntry find_dataset_entry(const std::filesystem::path& dir, const std::string& name) {
  auto find = [&](const std::string& stem) {
    for (const char* ext : {".png", ".bmp", ".jpg", ".jpeg"}) {
      const auto p = dir / (stem + ext);
      if (std::filesystem::exists(p)) return p;
    }
    return std::filesystem::path();
  };
  return {find(name), find(name + "-trimap"), find(name + "-gt")};
}

}  // namespace pccseg
