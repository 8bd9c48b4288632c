#pragma once

// scikit-image structural_similarity (gaussian_weights, sigma 1.5, population covariance, data_range 1)
// on testing::random_rgb_pair(1000 + k, 0.04 (k + 1)): {whole-image mean, mean over the pair's mask}.
// Regenerate with tests/oracles/reference_values.py.
inline constexpr double kSsimReference[20][2] = {
    {0.999176986275889, 0.999170242108951}, {0.996698769827933, 0.996694257546615},
    {0.992844585156399, 0.992881840632062}, {0.986977805746972, 0.987001139241648},
    {0.979588647892384, 0.979498629476137}, {0.972556586697724, 0.972708554427837},
    {0.962563321693153, 0.962452494779213}, {0.954062844674382, 0.954053913136227},
    {0.941714442317281, 0.941731519494625}, {0.929774146906017, 0.929497415165072},
    {0.913254283889328, 0.913211564365076}, {0.901382286009873, 0.902055458758646},
    {0.884460852058471, 0.884131133741025}, {0.866539816454196, 0.864522624328074},
    {0.850226403143481, 0.850816587008804}, {0.836572070618635, 0.836883745342281},
    {0.810144973399185, 0.811715929581798}, {0.805900236229001, 0.80614300477631},
    {0.775194527833336, 0.774485587284325}, {0.759444566894721, 0.763337940062924},
};

// 16×16 random binary image (splitmix64 seed 7, p = 0.5) against its complement.
inline constexpr double kSsimBinaryComplement = -0.921630892431328;
