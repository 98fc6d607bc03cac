//! Built-in colormaps.

/// A 256-entry RGB lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colormap {
    pub name: &'static str,
    pub lut: &'static [[u8; 3]; 256],
}

impl Colormap {
    /// The default colormap: a viridis-like gradient whose luminance is
    /// monotone in the index, so "brighter pixel" means "larger value".
    pub fn viridis() -> Self {
        Self {
            name: "viridis",
            lut: &VIRIDIS_LUT,
        }
    }

    pub fn midpoint(&self) -> [u8; 3] {
        self.lut[128]
    }
}

/// Piecewise-linear interpolation of nine viridis anchor colors.
pub const VIRIDIS_LUT: [[u8; 3]; 256] = [
    [68, 1, 84], [68, 2, 85], [68, 4, 86], [68, 5, 88], [68, 6, 89], [68, 8, 90], [69, 9, 91], [69, 10, 92],
    [69, 12, 94], [69, 13, 95], [69, 14, 96], [69, 16, 97], [69, 17, 98], [69, 19, 99], [69, 20, 101], [69, 21, 102],
    [70, 23, 103], [70, 24, 104], [70, 25, 105], [70, 27, 107], [70, 28, 108], [70, 29, 109], [70, 31, 110], [70, 32, 111],
    [70, 33, 113], [70, 35, 114], [70, 36, 115], [71, 37, 116], [71, 39, 117], [71, 40, 119], [71, 41, 120], [71, 43, 121],
    [71, 44, 122], [71, 45, 123], [70, 46, 123], [70, 48, 124], [69, 49, 124], [69, 50, 125], [69, 51, 125], [68, 52, 126],
    [68, 53, 126], [68, 55, 127], [67, 56, 127], [67, 57, 128], [66, 58, 128], [66, 59, 129], [66, 60, 130], [65, 62, 130],
    [65, 63, 131], [65, 64, 131], [64, 65, 132], [64, 66, 132], [63, 67, 133], [63, 69, 133], [63, 70, 134], [62, 71, 134],
    [62, 72, 135], [62, 73, 135], [61, 74, 136], [61, 75, 136], [60, 77, 137], [60, 78, 138], [60, 79, 138], [59, 80, 139],
    [59, 81, 139], [58, 82, 139], [58, 83, 139], [57, 84, 139], [57, 85, 139], [57, 86, 139], [56, 87, 140], [56, 88, 140],
    [55, 89, 140], [55, 90, 140], [54, 91, 140], [54, 92, 140], [53, 93, 140], [53, 94, 140], [52, 95, 140], [52, 96, 140],
    [51, 97, 141], [51, 98, 141], [50, 99, 141], [50, 100, 141], [49, 101, 141], [49, 102, 141], [49, 103, 141], [48, 104, 141],
    [48, 105, 141], [47, 106, 141], [47, 107, 141], [46, 108, 142], [46, 109, 142], [45, 110, 142], [45, 111, 142], [44, 112, 142],
    [44, 113, 142], [44, 114, 142], [43, 115, 142], [43, 116, 142], [42, 117, 142], [42, 118, 142], [42, 119, 142], [41, 120, 142],
    [41, 121, 142], [41, 122, 142], [40, 123, 142], [40, 124, 142], [40, 125, 142], [39, 126, 142], [39, 127, 142], [39, 128, 142],
    [38, 129, 141], [38, 130, 141], [38, 131, 141], [37, 132, 141], [37, 133, 141], [37, 134, 141], [36, 135, 141], [36, 136, 141],
    [36, 137, 141], [35, 138, 141], [35, 139, 141], [35, 140, 141], [34, 141, 141], [34, 142, 141], [34, 143, 141], [33, 144, 141],
    [33, 144, 141], [33, 145, 140], [33, 146, 140], [34, 147, 140], [34, 148, 139], [34, 149, 139], [34, 150, 139], [34, 151, 138],
    [35, 152, 138], [35, 153, 137], [35, 154, 137], [35, 154, 137], [35, 155, 136], [36, 156, 136], [36, 157, 136], [36, 158, 135],
    [36, 159, 135], [36, 160, 134], [36, 161, 134], [37, 162, 134], [37, 163, 133], [37, 164, 133], [37, 164, 133], [37, 165, 132],
    [38, 166, 132], [38, 167, 131], [38, 168, 131], [38, 169, 131], [38, 170, 130], [39, 171, 130], [39, 172, 130], [39, 173, 129],
    [40, 174, 128], [42, 174, 127], [43, 175, 127], [45, 176, 126], [47, 177, 125], [48, 178, 124], [50, 179, 123], [52, 179, 122],
    [53, 180, 121], [55, 181, 120], [57, 182, 119], [58, 183, 118], [60, 184, 117], [62, 185, 116], [63, 185, 115], [65, 186, 114],
    [67, 187, 113], [68, 188, 112], [70, 189, 111], [72, 190, 111], [73, 190, 110], [75, 191, 109], [77, 192, 108], [78, 193, 107],
    [80, 194, 106], [82, 195, 105], [83, 196, 104], [85, 196, 103], [87, 197, 102], [88, 198, 101], [90, 199, 100], [92, 200, 99],
    [94, 200, 98], [96, 201, 96], [99, 202, 95], [101, 202, 93], [104, 203, 92], [106, 204, 90], [109, 204, 89], [111, 205, 87],
    [113, 205, 86], [116, 206, 84], [118, 207, 82], [121, 207, 81], [123, 208, 79], [126, 209, 78], [128, 209, 76], [131, 210, 75],
    [133, 211, 73], [135, 211, 72], [138, 212, 70], [140, 212, 69], [143, 213, 67], [145, 214, 66], [148, 214, 64], [150, 215, 62],
    [153, 216, 61], [155, 216, 59], [157, 217, 58], [160, 217, 56], [162, 218, 55], [165, 219, 53], [167, 219, 52], [170, 220, 50],
    [172, 220, 50], [175, 221, 49], [177, 221, 49], [180, 221, 48], [183, 222, 48], [185, 222, 48], [188, 222, 47], [191, 223, 47],
    [193, 223, 46], [196, 223, 46], [198, 224, 46], [201, 224, 45], [204, 224, 45], [206, 225, 44], [209, 225, 44], [211, 225, 44],
    [214, 226, 43], [217, 226, 43], [219, 227, 42], [222, 227, 42], [224, 227, 41], [227, 228, 41], [230, 228, 41], [232, 228, 40],
    [235, 229, 40], [237, 229, 39], [240, 229, 39], [243, 230, 39], [245, 230, 38], [248, 230, 38], [250, 231, 37], [253, 231, 37],];

#[cfg(test)]
mod tests {
    use super::*;

    fn luminance(rgb: [u8; 3]) -> f64 {
        0.2126 * rgb[0] as f64 + 0.7152 * rgb[1] as f64 + 0.0722 * rgb[2] as f64
    }

    #[test]
    fn lut_has_256_entries_with_monotone_luminance() {
        let cmap = Colormap::viridis();
        assert_eq!(cmap.lut.len(), 256);
        for i in 1..256 {
            assert!(
                luminance(cmap.lut[i]) >= luminance(cmap.lut[i - 1]),
                "luminance dips at index {i}"
            );
        }
        assert!(luminance(cmap.lut[255]) > luminance(cmap.lut[0]) + 100.0);
    }
}
