"""Published numeric tables for the odd character of modulus 4, kept as strings."""

# n -> (gamma_hat, gamma, gamma / gamma_hat), columns as printed
CHI4_GAMMA = {
    10: ("8.6123842782e-14", "8.5921206983e-14", "0.997647158"),
    100: ("1.0054943805e-174", "1.0057597216e-174", "0.9997361785"),
    1000: ("1.7838444188e-2350", "1.7838866878e-2350", "0.9999763051"),
    10000: ("1.7271165350e-30650", "1.7271200653e-30650", "0.9999979560"),
    100000: ("8.1291521235e-384416", "8.1291531304e-384416", "0.9999998761"),
}

# n -> {d: monic coefficients, highest degree first}
CHI4_JENSEN = {
    100: {2: ("1", "0.3332", "-1.9985"), 3: ("1", "0.8306", "-5.8678", "-1.3254")},
    1000: {2: ("1", "0.1136", "-1.9997"), 3: ("1", "0.2839", "-5.9847", "-0.4414")},
    10000: {2: ("1", "0.0375", "-1.9999"), 3: ("1", "0.0936", "-5.9984", "-0.1435")},
    100000: {2: ("1", "0.0012", "-1.9999"), 3: ("1", "0.0304", "-5.9998", "-0.0444")},
}

# rows beyond this need --allow-long
LONG_RUN_THRESHOLD = 10000
