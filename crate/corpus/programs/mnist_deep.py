# A deep MNIST classifier using convolutional layers.
import tensorflow as tf
from tensorflow.examples.tutorials.mnist import input_data

mnist = input_data.read_data_sets("/tmp/data/", one_hot=True)

def deepnn(x):
    # Reshape to use within a convolutional neural net.
    x_image = tf.reshape(x, [-1, 28, 28, 1])
    # First convolutional layer - maps one grayscale image to 32 feature maps.
    conv1 = tf.layers.conv2d(x_image, 32, 5, activation=tf.nn.relu)
    # Pooling layer - downsamples by 2X.
    pool1 = tf.layers.max_pooling2d(conv1, 2, 2)
    # Second convolutional layer - maps 32 feature maps to 64.
    conv2 = tf.layers.conv2d(pool1, 64, 5, activation=tf.nn.relu)
    # Second pooling layer.
    pool2 = tf.layers.max_pooling2d(conv2, 2, 2)
    # Fully connected layer 1 - after 2 rounds of downsampling, our 28x28
    # image is down to 7x7x64 feature maps - map this to 1024 features.
    flat = tf.contrib.layers.flatten(pool2)
    fc1 = tf.layers.dense(flat, 1024)
    # Map the 1024 features to 10 classes, one for each digit.
    logits = tf.layers.dense(fc1, 10)
    return logits

# Create the model
x = tf.placeholder(tf.float32, [None, 784])
# Define loss and optimizer
y_ = tf.placeholder(tf.float32, [None, 10])
# Build the graph for the deep net
y_conv = deepnn(x)
cross_entropy = tf.reduce_mean(tf.nn.softmax_cross_entropy_with_logits(labels=y_, logits=y_conv))
train_step = tf.train.AdamOptimizer(0.0001).minimize(cross_entropy)
