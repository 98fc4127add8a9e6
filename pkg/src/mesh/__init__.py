"""単体複体と離散外微分: 外心双対、Hodgeスター、外微分、トレース作用素、拡散ラプラシアン。"""
