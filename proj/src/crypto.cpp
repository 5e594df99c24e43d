#include "shakekey/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>
#include <stdexcept>

namespace shakekey {

namespace {

struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const noexcept { EVP_CIPHER_CTX_free(ctx); }
};
using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

[[noreturn]] void fail(const char* what) {
    throw std::runtime_error(std::string("cipher failure: ") + what);
}

SealedMessage seal_with_nonce(const SymmetricKey& key,
                              std::span<const std::uint8_t> plaintext,
                              const std::array<std::uint8_t, 12>& nonce) {
    SealedMessage msg;
    msg.nonce = nonce;
    msg.ciphertext.resize(plaintext.size());

    CtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("ctx alloc");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.bytes.data(),
                           msg.nonce.data()) != 1)
        fail("encrypt init");
    int len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), msg.ciphertext.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        fail("encrypt update");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), msg.ciphertext.data() + len, &fin) != 1)
        fail("encrypt final");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG,
                            static_cast<int>(msg.tag.size()), msg.tag.data()) != 1)
        fail("get tag");
    return msg;
}

}  // namespace

SealedMessage seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext,
                   std::mt19937_64& rng) {
    std::array<std::uint8_t, 12> nonce;
    for (std::size_t i = 0; i < nonce.size(); i += 4) {
        const auto word = static_cast<std::uint32_t>(rng());
        nonce[i] = static_cast<std::uint8_t>(word & 0xff);
        nonce[i + 1] = static_cast<std::uint8_t>((word >> 8) & 0xff);
        nonce[i + 2] = static_cast<std::uint8_t>((word >> 16) & 0xff);
        nonce[i + 3] = static_cast<std::uint8_t>((word >> 24) & 0xff);
    }
    return seal_with_nonce(key, plaintext, nonce);
}

SealedMessage seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext) {
    std::array<std::uint8_t, 12> nonce;
    if (RAND_bytes(nonce.data(), static_cast<int>(nonce.size())) != 1) fail("rand");
    return seal_with_nonce(key, plaintext, nonce);
}

std::optional<std::vector<std::uint8_t>> open(const SymmetricKey& key,
                                              const SealedMessage& msg) {
    CtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("ctx alloc");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.bytes.data(),
                           msg.nonce.data()) != 1)
        fail("decrypt init");

    std::vector<std::uint8_t> plaintext(msg.ciphertext.size());
    int len = 0;
    if (!msg.ciphertext.empty() &&
        EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, msg.ciphertext.data(),
                          static_cast<int>(msg.ciphertext.size())) != 1)
        return std::nullopt;

    auto tag = msg.tag;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(tag.size()),
                            tag.data()) != 1)
        fail("set tag");
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + len, &fin) != 1)
        return std::nullopt;  // tag mismatch: wrong key or tampering
    return plaintext;
}

std::vector<std::uint8_t> SealedMessage::encode() const {
    std::vector<std::uint8_t> wire;
    wire.reserve(nonce.size() + 4 + ciphertext.size() + tag.size());
    wire.insert(wire.end(), nonce.begin(), nonce.end());
    const auto n = static_cast<std::uint32_t>(ciphertext.size());
    wire.push_back(static_cast<std::uint8_t>((n >> 24) & 0xff));
    wire.push_back(static_cast<std::uint8_t>((n >> 16) & 0xff));
    wire.push_back(static_cast<std::uint8_t>((n >> 8) & 0xff));
    wire.push_back(static_cast<std::uint8_t>(n & 0xff));
    wire.insert(wire.end(), ciphertext.begin(), ciphertext.end());
    wire.insert(wire.end(), tag.begin(), tag.end());
    return wire;
}

SealedMessage SealedMessage::decode(std::span<const std::uint8_t> wire) {
    SealedMessage msg;
    if (wire.size() < msg.nonce.size() + 4 + msg.tag.size())
        throw ParseError("sealed message wire too short");
    std::size_t off = 0;
    std::copy_n(wire.begin(), msg.nonce.size(), msg.nonce.begin());
    off += msg.nonce.size();
    const std::uint32_t n = (static_cast<std::uint32_t>(wire[off]) << 24) |
                            (static_cast<std::uint32_t>(wire[off + 1]) << 16) |
                            (static_cast<std::uint32_t>(wire[off + 2]) << 8) |
                            static_cast<std::uint32_t>(wire[off + 3]);
    off += 4;
    if (wire.size() != off + n + msg.tag.size())
        throw ParseError("sealed message length prefix does not match payload");
    msg.ciphertext.assign(wire.begin() + static_cast<std::ptrdiff_t>(off),
                          wire.begin() + static_cast<std::ptrdiff_t>(off + n));
    off += n;
    std::copy_n(wire.begin() + static_cast<std::ptrdiff_t>(off), msg.tag.size(),
                msg.tag.begin());
    return msg;
}

std::vector<std::uint8_t> to_bytes(std::string_view s) {
    return {s.begin(), s.end()};
}

}  // namespace shakekey
