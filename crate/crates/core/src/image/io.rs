use std::fs::File;
use std::io::{BufWriter, ErrorKind, Write};
use std::path::Path;

use super::{ImageError, ImageU8};

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Reads a binary PPM (P6, maxval 255) or an 8-bit RGB PNG.
pub fn load_image(path: &Path) -> Result<ImageU8, ImageError> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => ImageError::FileNotFound(path.display().to_string()),
        _ => ImageError::Io(e),
    })?;
    if bytes.starts_with(b"P6") {
        decode_ppm(&bytes)
    } else if bytes.starts_with(&PNG_MAGIC) {
        decode_png(&bytes)
    } else {
        Err(ImageError::UnsupportedFormat(path.display().to_string()))
    }
}

/// Encodes as PNG for a `.png` extension and P6 PPM otherwise.
pub fn encode_image(image: &ImageU8, path: &Path) -> Result<Vec<u8>, ImageError> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        encode_png(image)
    } else {
        Ok(encode_ppm(image))
    }
}

pub fn save_image(image: &ImageU8, path: &Path) -> Result<(), ImageError> {
    let bytes = encode_image(image, path)?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

pub fn encode_ppm(image: &ImageU8) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

/// Parses P6 with `#` comments; exactly one whitespace byte follows maxval.
pub fn decode_ppm(bytes: &[u8]) -> Result<ImageU8, ImageError> {
    if !bytes.starts_with(b"P6") {
        return Err(ImageError::UnsupportedFormat("missing P6 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (k, field) in fields.iter_mut().enumerate() {
        // whitespace and comments before each field
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(ImageError::CorruptHeader("header ends early".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *field = text
            .parse()
            .map_err(|_| ImageError::CorruptHeader(format!("bad header field {k}")))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImageError::CorruptHeader("missing separator after maxval".into()));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(ImageError::UnsupportedFormat(format!("maxval {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::CorruptHeader(format!("dimensions {width}x{height}")));
    }
    let need = width as usize * height as usize * 3;
    let body = &bytes[pos..];
    if body.len() < need {
        return Err(ImageError::CorruptHeader(format!(
            "pixel data truncated: {} of {need} bytes",
            body.len()
        )));
    }
    ImageU8::new(width, height, body[..need].to_vec())
}

fn decode_png(bytes: &[u8]) -> Result<ImageU8, ImageError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImageError::CorruptHeader(e.to_string()))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::UnsupportedFormat(format!(
            "png {:?} {:?}; only 8-bit RGB is supported",
            info.color_type, info.bit_depth
        )));
    }
    let (width, height) = (info.width, info.height);
    let mut buf = vec![0; width as usize * height as usize * 3];
    reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::CorruptHeader(e.to_string()))?;
    ImageU8::new(width, height, buf)
}

fn encode_png(image: &ImageU8) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width(), image.height());
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| ImageError::Io(std::io::Error::other(e)))?;
        writer
            .write_image_data(image.data())
            .map_err(|e| ImageError::Io(std::io::Error::other(e)))?;
    }
    Ok(out)
}
