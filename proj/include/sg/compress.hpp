#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sg {

/// Lossless, deterministic byte compressor.
class Compressor {
 public:
  virtual ~Compressor() = default;
  virtual std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const = 0;
  virtual std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const = 0;
  virtual std::string name() const = 0;
};

/// xz container, LZMA2 at preset 9 with the extreme flag.
class LzmaCompressor final : public Compressor {
 public:
  explicit LzmaCompressor(std::uint32_t preset = 9, bool extreme = true) : preset_(preset), extreme_(extreme) {}

  std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const override;
  std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const override;
  std::string name() const override;

 private:
  std::uint32_t preset_;
  bool extreme_;
};

}  // namespace sg
