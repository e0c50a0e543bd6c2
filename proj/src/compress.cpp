#include "sg/compress.hpp"

#include <lzma.h>

#include "sg/error.hpp"

namespace sg {

std::vector<std::uint8_t> LzmaCompressor::compress(std::span<const std::uint8_t> data) const {
  const std::uint32_t preset = preset_ | (extreme_ ? LZMA_PRESET_EXTREME : 0u);
  std::vector<std::uint8_t> out(lzma_stream_buffer_bound(data.size()));
  std::size_t pos = 0;
  const lzma_ret ret = lzma_easy_buffer_encode(preset, LZMA_CHECK_CRC64, nullptr, data.data(), data.size(),
                                               out.data(), &pos, out.size());
  if (ret != LZMA_OK) throw Error(ErrorCode::Io, "lzma encoder failed with code " + std::to_string(ret));
  out.resize(pos);
  return out;
}

std::vector<std::uint8_t> LzmaCompressor::decompress(std::span<const std::uint8_t> data) const {
  lzma_stream strm = LZMA_STREAM_INIT;
  if (lzma_stream_decoder(&strm, UINT64_MAX, 0) != LZMA_OK) throw Error(ErrorCode::Io, "lzma decoder init");
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  strm.next_in = data.data();
  strm.avail_in = data.size();
  lzma_ret ret = LZMA_OK;
  while (ret == LZMA_OK) {
    strm.next_out = buf;
    strm.avail_out = sizeof buf;
    ret = lzma_code(&strm, LZMA_FINISH);
    out.insert(out.end(), buf, buf + (sizeof buf - strm.avail_out));
  }
  lzma_end(&strm);
  if (ret != LZMA_STREAM_END) throw Error(ErrorCode::Io, "lzma decoder failed with code " + std::to_string(ret));
  return out;
}

std::string LzmaCompressor::name() const {
  return "xz-lzma2-preset" + std::to_string(preset_) + (extreme_ ? "e" : "");
}

}  // namespace sg
