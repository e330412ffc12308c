use bemdsvr_web::{decompose_json, synthetic_json, walk_forward_json};
use serde_json::Value;

fn bounds(v: &Value) -> (Vec<f64>, Vec<f64>) {
    let get = |k: &str| v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    (get("lower"), get("upper"))
}

#[test]
fn synthetic_series_has_requested_length() {
    let v: Value = serde_json::from_str(&synthetic_json(3, 60, 0.3).unwrap()).unwrap();
    let (l, u) = bounds(&v);
    assert_eq!((l.len(), u.len()), (60, 60));
    assert_eq!(v["periods"][0], "2000-01");
    assert!(synthetic_json(3, 10, 0.3).is_err());
}

#[test]
fn decomposition_components_sum_to_input() {
    let v: Value = serde_json::from_str(&synthetic_json(1, 96, 0.2).unwrap()).unwrap();
    let (l, u) = bounds(&v);
    for method in ["bemd-trans1", "bemd-trans2", "emd"] {
        let d: Value = serde_json::from_str(&decompose_json(&l, &u, method, 0).unwrap()).unwrap();
        let comps = d["components"].as_array().unwrap();
        assert_eq!(comps.last().unwrap()["name"], "residual");
        let (re_in, im_in) = if method == "bemd-trans2" { (&u, &l) } else { (&l, &u) };
        for t in 0..l.len() {
            let re: f64 = comps.iter().map(|c| c["re"][t].as_f64().unwrap()).sum();
            let im: f64 = comps.iter().map(|c| c["im"][t].as_f64().unwrap()).sum();
            assert!((re - re_in[t]).abs() < 1e-8 && (im - im_in[t]).abs() < 1e-8, "{method} t={t}");
        }
    }
    assert!(decompose_json(&l, &u, "fft", 0).is_err());
}

#[test]
fn walk_forward_reports_scores() {
    let v: Value = serde_json::from_str(&synthetic_json(2, 60, 0.3).unwrap()).unwrap();
    let (l, u) = bounds(&v);
    let w: Value = serde_json::from_str(&walk_forward_json(&l, &u, 6, "holt", 0).unwrap()).unwrap();
    assert_eq!(w["model"], "HoltI");
    assert_eq!(w["pred_lower"].as_array().unwrap().len(), 6);
    assert_eq!(w["u_naive"].as_f64(), Some(1.0));
    assert!(w["u_model"].as_f64().unwrap() >= 0.0);
    assert!(walk_forward_json(&l, &u, 6, "arima", 0).is_err());
}
