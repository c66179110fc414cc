use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeneralPolygon, GeometryError, Point2};

/// Pre-sliced input: polygons per layer in millimetres, bottom-up.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub pixel_size_mm: f64,
    pub layer_height_mm: f64,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub z_index: i64,
    pub polygons: Vec<GeneralPolygon>,
}

#[derive(Serialize, Deserialize)]
struct RawStack {
    pixel_size_mm: f64,
    layer_height_mm: f64,
    layers: Vec<RawLayer>,
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    z_index: i64,
    polygons: Vec<RawPolygon>,
}

#[derive(Serialize, Deserialize)]
struct RawPolygon {
    outer: Vec<[f64; 2]>,
    #[serde(default)]
    holes: Vec<Vec<[f64; 2]>>,
}

fn to_ring(raw: &[[f64; 2]]) -> Vec<Point2> {
    raw.iter().map(|&[x, y]| Point2::new(x, y)).collect()
}

fn from_ring(ring: &[Point2]) -> Vec<[f64; 2]> {
    ring.iter().map(|p| [p.x, p.y]).collect()
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

pub fn parse_layer_stack(text: &str) -> Result<LayerStack, GeometryError> {
    let raw: RawStack = serde_json::from_str(text).map_err(|e| GeometryError::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    if raw.layers.is_empty() {
        return Err(GeometryError::EmptyStack);
    }
    if !(raw.pixel_size_mm > 0.0) {
        return Err(GeometryError::BadPixelSize(raw.pixel_size_mm));
    }
    let mut layers = Vec::with_capacity(raw.layers.len());
    for (idx, layer) in raw.layers.into_iter().enumerate() {
        let mut polygons = Vec::with_capacity(layer.polygons.len());
        for (k, poly) in layer.polygons.iter().enumerate() {
            let holes = poly.holes.iter().map(|h| to_ring(h)).collect();
            let p = GeneralPolygon::new(to_ring(&poly.outer), holes).map_err(|message| {
                GeometryError::InvalidLayer { layer: idx, message: format!("polygon {k}: {message}") }
            })?;
            polygons.push(p);
        }
        layers.push(Layer { z_index: layer.z_index, polygons });
    }
    layers.sort_by_key(|l| l.z_index);
    Ok(LayerStack { pixel_size_mm: raw.pixel_size_mm, layer_height_mm: raw.layer_height_mm, layers })
}

pub fn load_layer_stack(path: &Path) -> Result<LayerStack, GeometryError> {
    let text = std::fs::read_to_string(path)?;
    parse_layer_stack(&text)
}

/// Serialises to the same JSON layout that [`parse_layer_stack`] reads.
pub fn write_layer_stack(stack: &LayerStack) -> String {
    let raw = RawStack {
        pixel_size_mm: stack.pixel_size_mm,
        layer_height_mm: stack.layer_height_mm,
        layers: stack
            .layers
            .iter()
            .map(|l| RawLayer {
                z_index: l.z_index,
                polygons: l
                    .polygons
                    .iter()
                    .map(|p| RawPolygon {
                        outer: from_ring(&p.outer),
                        holes: p.holes.iter().map(|h| from_ring(h)).collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("layer stack serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{"pixel_size_mm": 1.0, "layer_height_mm": 0.2,
        "layers": [{"z_index": 0, "polygons": [{"outer": [[0,0],[8,0],[8,8],[0,8]]}]}]}"#;

    #[test]
    fn single_square_layer() {
        let s = parse_layer_stack(SQUARE).unwrap();
        assert_eq!(s.layers.len(), 1);
        assert_eq!(s.layers[0].polygons.len(), 1);
        assert_eq!(s.layers[0].polygons[0].outer.len(), 4);
    }

    #[test]
    fn hole_is_kept() {
        let text = r#"{"pixel_size_mm": 1.0, "layer_height_mm": 0.2, "layers": [{"z_index": 0,
            "polygons": [{"outer": [[0,0],[8,0],[8,8],[0,8]], "holes": [[[2,2],[2,4],[4,4],[4,2]]]}]}]}"#;
        let s = parse_layer_stack(text).unwrap();
        assert_eq!(s.layers[0].polygons[0].holes.len(), 1);
    }

    #[test]
    fn malformed_json_reports_offset() {
        let text = "{\"pixel_size_mm\": 1.0,\n  \"layers\": [ oops ]}";
        match parse_layer_stack(text) {
            Err(GeometryError::Parse { offset, .. }) => assert_eq!(&text[offset..offset + 1], "o"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn self_intersection_names_layer() {
        let text = r#"{"pixel_size_mm": 1.0, "layer_height_mm": 0.2, "layers": [
            {"z_index": 0, "polygons": [{"outer": [[0,0],[8,0],[8,8],[0,8]]}]},
            {"z_index": 1, "polygons": [{"outer": [[0,0],[2,2],[2,0],[0,2]]}]}]}"#;
        match parse_layer_stack(text) {
            Err(GeometryError::InvalidLayer { layer, message }) => {
                assert_eq!(layer, 1);
                assert!(message.contains("self-intersecting"));
            }
            other => panic!("expected invalid layer, got {other:?}"),
        }
    }

    #[test]
    fn empty_stack_rejected() {
        let text = r#"{"pixel_size_mm": 1.0, "layer_height_mm": 0.2, "layers": []}"#;
        assert!(matches!(parse_layer_stack(text), Err(GeometryError::EmptyStack)));
    }

    #[test]
    fn write_then_parse_is_idempotent() {
        let s = parse_layer_stack(SQUARE).unwrap();
        let again = parse_layer_stack(&write_layer_stack(&s)).unwrap();
        assert_eq!(s, again);
        assert_eq!(write_layer_stack(&s), write_layer_stack(&again));
    }
}
