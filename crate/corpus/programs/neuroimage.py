# Train a convolutional network on 3-D brain volumes.
import tensorflow as tf

def read_examples(path):
    raw = tf.read_file(path)
    volume = tf.decode_raw(raw, tf.float32)
    return volume

def build_network(scans):
    # Volumes arrive flattened; restore depth x height x width x channel.
    x = tf.reshape(scans, [-1, 16, 16, 16, 1])
    conv1 = tf.layers.conv3d(x, 32, 3, activation=tf.nn.relu)
    flat = tf.contrib.layers.flatten(conv1)
    logits = tf.layers.dense(flat, 2)
    return logits

volume = read_examples("/data/scan0001.raw")
logits = build_network(volume)
loss = tf.reduce_mean(logits)
train_op = tf.train.AdamOptimizer(0.001).minimize(loss)
